import { ApiClient } from "./api.js";
import { ReviewApp } from "./app.js";

function settings(): { baseUrl: string; reviewer: string } {
  const params = new URLSearchParams(window.location.search);
  const baseUrl =
    params.get("service") ?? localStorage.getItem("service-url") ?? "http://127.0.0.1:8642";
  let reviewer = params.get("reviewer") ?? localStorage.getItem("reviewer-id") ?? "";
  if (!reviewer) {
    reviewer = window.prompt("Reviewer id:") ?? "anonymous";
  }
  localStorage.setItem("service-url", baseUrl);
  localStorage.setItem("reviewer-id", reviewer);
  return { baseUrl, reviewer };
}

const { baseUrl, reviewer } = settings();
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
const app = new ReviewApp(new ApiClient(baseUrl, reviewer), root);
void app.start();
