"""Soft-margin kernel SVM trained by sequential minimal optimization.

The optimizer ascends the dual of the maximum-margin quadratic program by
repeatedly solving the two-variable subproblem analytically. The first
choice is the most violating feasible index, the second the least, with
fixed tie-breaking instead of random starts. Training rows are brought into
a canonical order first, so the fitted model depends only on the multiset of
rows, never on their order, and repeated runs are bit-identical.

Decision values are mapped to probabilities with a logistic curve fitted by
maximum likelihood on the training decision values (damped Newton).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

MODEL_SCHEMA = "svm-model/1"
OVR_SCHEMA = "ovr-model/1"

_SV_EPS = 1e-10  # duals at or below this are pruned after training
_STEP_EPS = 1e-12


class ConvergenceError(RuntimeError):
    """The optimizer exhausted max_passes before meeting the KKT tolerance."""


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and its parameter; gamma applies to the RBF kernel only."""

    kind: str = "linear"
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and self.gamma is not None and not self.gamma > 0:
            raise ValueError("rbf gamma must be positive")
        if self.kind == "linear" and self.gamma is not None:
            raise ValueError("linear kernel takes no gamma")


def kernel_matrix(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if spec.kind == "linear":
        return a @ b.T
    if spec.gamma is None:
        raise ValueError("rbf kernel evaluated without a concrete gamma")
    sq = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * (a @ b.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-spec.gamma * sq)


@dataclass(frozen=True)
class TrainConfig:
    """Solver parameters for one training run.

    class_weights scales the box constraint per class: "balanced" uses
    n / (k * n_class); a mapping gives explicit multipliers keyed by label;
    None leaves every sample at C.
    """

    C: float = 1.0
    tol: float = 1e-3
    max_passes: int = 200
    class_weights: dict | str | None = "balanced"
    seed: int = 0

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")
        if isinstance(self.class_weights, str) and self.class_weights != "balanced":
            raise ValueError(f"unknown class_weights policy {self.class_weights!r}")


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Trained binary classifier: support vectors, dual coefficients, bias.

    coeffs[i] is alpha_i * y_i for the i-th retained support vector, so the
    decision value is coeffs @ K(support_vectors, x) + bias. calibration holds
    the (slope, intercept) of the logistic probability map.
    """

    support_vectors: np.ndarray
    coeffs: np.ndarray
    bias: float
    kernel: KernelSpec
    calibration: tuple[float, float] | None = None
    c: float = 1.0
    target: str | None = None
    positive_label: str | None = None

    @property
    def dim(self) -> int:
        return int(self.support_vectors.shape[1])

    def linear_weights(self) -> np.ndarray:
        if self.kernel.kind != "linear":
            raise ValueError("primal weights exist only for the linear kernel")
        return self.coeffs @ self.support_vectors


def _class_box(y: np.ndarray, config: TrainConfig) -> np.ndarray:
    """Per-sample box constraint C_i from the class-weight policy."""
    c_i = np.full(y.shape, config.C, dtype=float)
    if config.class_weights is None:
        return c_i
    if config.class_weights == "balanced":
        n = len(y)
        for label in (-1.0, 1.0):
            mask = y == label
            c_i[mask] *= n / (2.0 * mask.sum())
        return c_i
    for label, mult in config.class_weights.items():
        if not mult > 0:
            raise ValueError("class weight multipliers must be positive")
        c_i[y == float(label)] *= float(mult)
    return c_i


def _canonical_order(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Total order on rows (features, then label) so training ignores input order."""
    keys = [y] + [x[:, j] for j in range(x.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


class _Smo:
    """Pairwise coordinate ascent on the dual, most-violating-pair selection.

    Works in the substituted variables beta_i = y_i * alpha_i, each boxed in
    [A_i, B_i] with sum(beta) = 0. The first choice is the feasible index
    with the steepest ascent gradient, the second the one with the smallest;
    the pair-wise subproblem is solved exactly. Ties break to the lowest
    index (numpy argmax/argmin), so runs are deterministic. The KKT gap
    (first-choice minus second-choice gradient) is the stopping criterion.
    """

    def __init__(self, kmat: np.ndarray, y: np.ndarray, box: np.ndarray, tol: float):
        self.K = kmat
        self.y = y
        self.box = box
        self.tol = tol
        n = len(y)
        self.beta = np.zeros(n)
        self.low = np.where(y > 0, 0.0, -box)
        self.high = np.where(y > 0, box, 0.0)
        self.grad = y.astype(float).copy()  # d/d beta of the dual: y - K beta
        self.b = 0.0

    @property
    def alpha(self) -> np.ndarray:
        return self.y * self.beta

    def _refresh_gradient(self) -> None:
        self.grad = self.y - self.K @ self.beta

    def _select(self) -> tuple[int, int, float]:
        can_up = self.beta < self.high - _SV_EPS
        can_down = self.beta > self.low + _SV_EPS
        if not can_up.any() or not can_down.any():
            return -1, -1, 0.0
        up = np.where(can_up, self.grad, -np.inf)
        down = np.where(can_down, self.grad, np.inf)
        i = int(np.argmax(up))
        j = int(np.argmin(down))
        return i, j, float(self.grad[i] - self.grad[j])

    def _finalize_bias(self) -> None:
        """Threshold from the non-bound gradients (their common value at the
        optimum), falling back to the midpoint of the active-set extremes."""
        nonbound = (self.beta > self.low + _SV_EPS) & (self.beta < self.high - _SV_EPS)
        if nonbound.any():
            self.b = float(self.grad[nonbound].mean())
            return
        i, j, _ = self._select()
        if i >= 0:
            self.b = float(0.5 * (self.grad[i] + self.grad[j]))

    def run(self, max_passes: int) -> None:
        n = len(self.y)
        max_steps = max_passes * n
        steps = 0
        while True:
            i, j, gap = self._select()
            if i < 0 or gap <= self.tol:
                break
            steps += 1
            if steps > max_steps:
                raise ConvergenceError(
                    f"KKT gap {gap:.3g} > tol {self.tol} after {max_steps} pair steps"
                )
            room = min(self.high[i] - self.beta[i], self.beta[j] - self.low[j])
            curvature = self.K[i, i] + self.K[j, j] - 2.0 * self.K[i, j]
            if curvature > 0:
                step = min(room, gap / curvature)
            else:
                step = room  # flat direction with positive slope: go to the cap
            self.beta[i] += step
            self.beta[j] -= step
            self.grad -= step * (self.K[:, i] - self.K[:, j])
            if steps % n == 0:
                self._refresh_gradient()  # cancel incremental drift
        self._refresh_gradient()
        self._finalize_bias()


def dual_objective(
    kmat: np.ndarray, y: np.ndarray, alpha: np.ndarray
) -> float:
    """Dual objective sum(alpha) - 0.5 (alpha*y)' K (alpha*y)."""
    v = alpha * y
    return float(alpha.sum() - 0.5 * v @ kmat @ v)


def _as_xy(
    samples: Sequence[Sequence[float]] | np.ndarray, labels: Sequence[float] | np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2:
        raise ValueError("samples must be a 2-d array of feature rows")
    y = np.asarray(labels, dtype=float)
    if y.shape != (x.shape[0],):
        raise ValueError("labels must align one-to-one with samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite entries")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    return x, y


def _concrete_kernel(spec: KernelSpec, x: np.ndarray) -> KernelSpec:
    """Fill in the data-driven default gamma = 1 / (d * var) for the RBF kernel."""
    if spec.kind != "rbf" or spec.gamma is not None:
        return spec
    var = float(x.var())
    gamma = 1.0 / (x.shape[1] * var) if var > 0 else 1.0 / x.shape[1]
    return KernelSpec("rbf", gamma)


def train_svm(
    samples: Sequence[Sequence[float]] | np.ndarray,
    labels: Sequence[float] | np.ndarray,
    config: TrainConfig = TrainConfig(),
    kernel: KernelSpec = KernelSpec("linear"),
    target: str | None = None,
    positive_label: str | None = None,
) -> SvmModel:
    """Fit the soft-margin dual and calibrate a probability map.

    Raises ValueError for single-class or malformed input and
    ConvergenceError when max_passes sweeps do not reach the tolerance.
    """
    x, y = _as_xy(samples, labels)
    if len(y) < 2:
        raise ValueError("need at least two samples")
    if len(np.unique(y)) < 2:
        raise ValueError("training requires both classes present")

    order = _canonical_order(x, y)
    x, y = x[order], y[order]
    box = _class_box(y, config)
    spec = _concrete_kernel(kernel, x)
    kmat = kernel_matrix(spec, x, x)

    smo = _Smo(kmat, y, box, config.tol)
    smo.run(config.max_passes)

    # dual feasibility is checked before pruning near-zero coefficients
    if np.any(smo.alpha < -1e-9) or np.any(smo.alpha > box + 1e-9):
        raise ConvergenceError("dual variables escaped the box constraint")
    if abs(float(smo.alpha @ y)) > max(config.tol, 1e-8):
        raise ConvergenceError("equality constraint violated at the solution")

    decisions = kmat @ (smo.alpha * y) + smo.b
    calibration = fit_calibration(decisions, y)

    keep = smo.alpha > _SV_EPS
    if not np.any(keep):
        raise ConvergenceError("optimizer returned an empty support set")
    return SvmModel(
        support_vectors=x[keep].copy(),
        coeffs=(smo.alpha * y)[keep].copy(),
        bias=float(smo.b),
        kernel=spec,
        calibration=calibration,
        c=config.C,
        target=target,
        positive_label=positive_label,
    )


def decision_values(model: SvmModel, points: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if model.support_vectors.size == 0:
        raise ValueError("model has no support vectors")
    if pts.shape[1] != model.dim:
        raise ValueError(f"point dimension {pts.shape[1]} != model dimension {model.dim}")
    return kernel_matrix(model.kernel, pts, model.support_vectors) @ model.coeffs + model.bias


def decision_value(model: SvmModel, x: Sequence[float]) -> float:
    return float(decision_values(model, [x])[0])


def _sigmoid(t: np.ndarray) -> np.ndarray:
    # argument clipped so outputs stay strictly inside (0, 1) in float64
    return 1.0 / (1.0 + np.exp(-np.clip(t, -36.0, 36.0)))


def fit_calibration(decisions: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    """Maximum-likelihood logistic map p = sigmoid(a * f + c), damped Newton.

    The slope is clamped to be nonnegative afterwards: the probability map is
    contractually nondecreasing in the decision value, and an anti-correlated
    fit (possible only on degenerate inputs) collapses to the class prior.
    """
    f = np.asarray(decisions, dtype=float)
    t = (np.asarray(labels, dtype=float) + 1.0) / 2.0
    n_pos = float(t.sum())
    n_neg = float(len(t) - n_pos)
    a = 0.0
    c = float(np.log((n_pos + 1.0) / (n_neg + 1.0)))

    def nll(a_: float, c_: float) -> float:
        p = _sigmoid(a_ * f + c_)
        return float(-(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)).sum())

    damping = 1e-12
    current = nll(a, c)
    for _ in range(100):
        p = _sigmoid(a * f + c)
        grad = np.array([float(((t - p) * f).sum()), float((t - p).sum())])
        if np.max(np.abs(grad)) < 1e-10:
            break
        w = p * (1.0 - p)
        hess = np.array(
            [
                [float((w * f * f).sum()), float((w * f).sum())],
                [float((w * f).sum()), float(w.sum())],
            ]
        )
        step = np.linalg.solve(hess + damping * np.eye(2), grad)
        candidate = nll(a + step[0], c + step[1])
        if candidate <= current + 1e-12:
            a, c = a + float(step[0]), c + float(step[1])
            current = candidate
            damping = max(damping / 10.0, 1e-12)
        else:
            damping = min(damping * 10.0, 1e8)
    if a < 0.0:
        a, c = 0.0, float(np.log((n_pos + 1.0) / (n_neg + 1.0)))
    return a, c


def predict_scores(model: SvmModel, points: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    if model.calibration is None:
        raise ValueError("model carries no calibration parameters")
    a, c = model.calibration
    return _sigmoid(a * decision_values(model, points) + c)


def predict_score(model: SvmModel, x: Sequence[float]) -> float:
    return float(predict_scores(model, [x])[0])


def kkt_violation(
    model_or_smo_alpha: np.ndarray,
    kmat: np.ndarray,
    y: np.ndarray,
    box: np.ndarray,
    bias: float,
) -> float:
    """Largest violation of the optimality conditions over the training set."""
    alpha = model_or_smo_alpha
    f = kmat @ (alpha * y) + bias
    margins = y * f
    worst = 0.0
    for i in range(len(y)):
        if alpha[i] <= _SV_EPS:
            worst = max(worst, 1.0 - margins[i])
        elif alpha[i] >= box[i] - _SV_EPS:
            worst = max(worst, margins[i] - 1.0)
        else:
            worst = max(worst, abs(margins[i] - 1.0))
    return float(worst)


@dataclass(frozen=True, eq=False)
class OvrModel:
    """One-vs-rest stack of binary models with a deterministic argmax rule.

    Ties go to the lowest class id. Class ids are kept in ascending order and
    may be ints or strings (anything JSON-stable with a total order).
    """

    classes: tuple
    models: tuple[SvmModel, ...]

    def __post_init__(self):
        if len(self.classes) != len(self.models):
            raise ValueError("one binary model per class required")
        if list(self.classes) != sorted(self.classes):
            raise ValueError("classes must be in ascending order")

    @property
    def dim(self) -> int:
        return self.models[0].dim

    def score_matrix(self, points: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
        """Calibrated per-class scores, one column per class in class order."""
        return np.column_stack([predict_scores(m, points) for m in self.models])

    def predict(self, points: Sequence[Sequence[float]] | np.ndarray) -> list:
        scores = self.score_matrix(points)
        out = []
        for row in scores:
            best = 0
            for j in range(1, len(self.classes)):
                if row[j] > row[best]:
                    best = j
            out.append(self.classes[best])
        return out


def train_ovr(
    samples: Sequence[Sequence[float]] | np.ndarray,
    labels: Sequence,
    config: TrainConfig = TrainConfig(),
    kernel: KernelSpec = KernelSpec("linear"),
    target: str | None = None,
) -> OvrModel:
    """Train one binary model per class (that class vs the rest)."""
    x = np.asarray(samples, dtype=float)
    label_list = list(labels)
    classes = sorted(set(label_list))
    if len(classes) < 2:
        raise ValueError("one-vs-rest needs at least two classes present")
    models = []
    for cls in classes:
        y = np.where(np.asarray([lab == cls for lab in label_list]), 1.0, -1.0)
        models.append(
            train_svm(x, y, config, kernel, target=target, positive_label=str(cls))
        )
    return OvrModel(classes=tuple(classes), models=tuple(models))


# ---------------------------------------------------------------------------
# serialization: self-describing JSON documents with full round-trip fidelity


def model_to_doc(model: SvmModel) -> dict:
    doc = {
        "schema": MODEL_SCHEMA,
        "kernel": {"kind": model.kernel.kind, "gamma": model.kernel.gamma},
        "c": model.c,
        "support_vectors": [[float(v) for v in row] for row in model.support_vectors],
        "coeffs": [float(v) for v in model.coeffs],
        "bias": model.bias,
        "calibration": list(model.calibration) if model.calibration else None,
    }
    if model.target is not None:
        doc["target"] = model.target
    if model.positive_label is not None:
        doc["positive_label"] = model.positive_label
    return doc


def model_from_doc(doc: dict) -> SvmModel:
    if doc.get("schema") != MODEL_SCHEMA:
        raise ValueError(f"unsupported model schema {doc.get('schema')!r}")
    kernel = KernelSpec(doc["kernel"]["kind"], doc["kernel"].get("gamma"))
    calibration = doc.get("calibration")
    return SvmModel(
        support_vectors=np.asarray(doc["support_vectors"], dtype=float),
        coeffs=np.asarray(doc["coeffs"], dtype=float),
        bias=float(doc["bias"]),
        kernel=kernel,
        calibration=tuple(calibration) if calibration else None,
        c=float(doc.get("c", 1.0)),
        target=doc.get("target"),
        positive_label=doc.get("positive_label"),
    )


def ovr_to_doc(model: OvrModel) -> dict:
    return {
        "schema": OVR_SCHEMA,
        "classes": list(model.classes),
        "models": [model_to_doc(m) for m in model.models],
    }


def ovr_from_doc(doc: dict) -> OvrModel:
    if doc.get("schema") != OVR_SCHEMA:
        raise ValueError(f"unsupported model schema {doc.get('schema')!r}")
    return OvrModel(
        classes=tuple(doc["classes"]),
        models=tuple(model_from_doc(m) for m in doc["models"]),
    )


def save_model(model: SvmModel | OvrModel, path: str | Path) -> None:
    doc = ovr_to_doc(model) if isinstance(model, OvrModel) else model_to_doc(model)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_model(path: str | Path) -> SvmModel | OvrModel:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") == OVR_SCHEMA:
        return ovr_from_doc(doc)
    return model_from_doc(doc)
