import type { FinalReportWire, PreliminaryReportWire } from "../src/types.js";

export function benignPreliminary(): PreliminaryReportWire {
  return {
    case_id: "case-42",
    route: "benign_auto",
    verdict_score: 0.08,
    laterality: "unspecified",
    created_at: 1000,
    base_version: 2,
    fields: [
      { name: "shape", value: "oval/round", provenance: "predicted" },
      { name: "internal_echo", value: "anechoic", provenance: "predicted" },
      { name: "posterior_acoustic", value: "enhancement", provenance: "predicted" },
      { name: "boundary", value: "abrupt", provenance: "default" },
      { name: "orientation", value: "parallel", provenance: "default" },
      { name: "margin", value: "circumscribed", provenance: "default" },
    ],
  };
}

export function malignantPreliminary(): PreliminaryReportWire {
  const names = [
    "shape",
    "internal_echo",
    "posterior_acoustic",
    "boundary",
    "orientation",
    "margin",
  ];
  return {
    case_id: "case-66",
    route: "malignant_manual",
    verdict_score: 0.91,
    laterality: "unspecified",
    created_at: 1000,
    base_version: 2,
    fields: names.map((name) => ({
      name,
      value: "",
      provenance: "manual_placeholder" as const,
    })),
  };
}

export function finalWithOneEdit(): FinalReportWire {
  const prelim = benignPreliminary();
  return {
    ...prelim,
    final_verdict: "benign",
    reviewer: "doc-1",
    final_fields: prelim.fields.map((field) => ({
      name: field.name,
      value: field.name === "internal_echo" ? "homogeneous" : field.value,
    })),
    edit_log: [{ field: "internal_echo", old: "anechoic", new: "homogeneous", at: 2000 }],
  };
}
