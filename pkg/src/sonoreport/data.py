"""Dataset files and the seeded synthetic generator.

File format: one self-describing JSON object per line (streamable and
diff-able). Enum-valued labels use the canonical lowercase tokens
("oval_round", "anechoic", "no_posterior_features", ...); the joint
echo/posterior code rides along as a two-character string when derivable.

Loading is strict about structure and lenient about label semantics:
malformed JSON, missing keys, bad splits and dimension drift are hard errors
(with line numbers), while rows whose labels are out of lexicon or form the
forbidden enhancement+homogeneous combination are rejected individually with
a diagnostic, and everything else loads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .fusion import ForbiddenCombinationError, FusedClass, fuse_labels
from .lexicon import InternalEcho, LexiconError, PosteriorAcoustic, Shape, parse_enum
from .records import CaseRecord, FeatureVector, ReviewState, Triage

SPLITS = ("train", "validation", "test")

MALIGNANCY_TOKENS = ("benign", "malignant")


class DatasetError(ValueError):
    """Structural problem in a dataset file (carries the line number)."""


@dataclass(frozen=True)
class DatasetLabels:
    malignancy: str | None = None
    shape: Shape | None = None
    internal_echo: InternalEcho | None = None
    posterior_acoustic: PosteriorAcoustic | None = None

    def __post_init__(self):
        if self.malignancy is not None and self.malignancy not in MALIGNANCY_TOKENS:
            raise ValueError(f"malignancy label must be one of {MALIGNANCY_TOKENS}")

    def fused(self) -> FusedClass | None:
        """Joint code of the echo/posterior pair; raises on the 00 combination."""
        if self.internal_echo is None or self.posterior_acoustic is None:
            return None
        return fuse_labels(self.internal_echo, self.posterior_acoustic)


@dataclass(frozen=True)
class DatasetRecord:
    case_id: str
    features: tuple[float, ...]
    split: str
    labels: DatasetLabels | None = None
    source: str = "unknown"
    feature_provenance: str = "external_embedding"

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}")
        if not self.features or any(not math.isfinite(v) for v in self.features):
            raise ValueError("features must be non-empty and finite")

    def vector(self) -> np.ndarray:
        return np.asarray(self.features, dtype=float)

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "case_id": self.case_id,
            "features": list(self.features),
            "split": self.split,
            "source": self.source,
            "feature_provenance": self.feature_provenance,
        }
        if self.labels is not None:
            labels: dict[str, Any] = {}
            if self.labels.malignancy is not None:
                labels["malignancy"] = self.labels.malignancy
            if self.labels.shape is not None:
                labels["shape"] = self.labels.shape.value
            if self.labels.internal_echo is not None:
                labels["internal_echo"] = self.labels.internal_echo.value
            if self.labels.posterior_acoustic is not None:
                labels["posterior_acoustic"] = self.labels.posterior_acoustic.value
            try:
                fused = self.labels.fused()
            except ForbiddenCombinationError:
                fused = None
            if fused is not None:
                labels["fused"] = fused.code
            doc["labels"] = labels
        return doc


@dataclass(frozen=True)
class RowDiagnostic:
    line: int
    case_id: str | None
    reason: str


@dataclass
class LoadResult:
    records: list[DatasetRecord]
    split_counts: dict[str, int]
    rejected: list[RowDiagnostic] = field(default_factory=list)
    dim: int | None = None


def save_dataset(records: Iterable[DatasetRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")


def _parse_labels(raw: Mapping[str, Any]) -> DatasetLabels:
    shape = parse_enum(Shape, raw["shape"]) if "shape" in raw else None
    echo = parse_enum(InternalEcho, raw["internal_echo"]) if "internal_echo" in raw else None
    posterior = (
        parse_enum(PosteriorAcoustic, raw["posterior_acoustic"])
        if "posterior_acoustic" in raw
        else None
    )
    labels = DatasetLabels(
        malignancy=raw.get("malignancy"),
        shape=shape,  # type: ignore[arg-type]
        internal_echo=echo,  # type: ignore[arg-type]
        posterior_acoustic=posterior,  # type: ignore[arg-type]
    )
    fused = labels.fused()  # raises ForbiddenCombinationError on the 00 pair
    declared = raw.get("fused")
    if declared is not None and (fused is None or declared != fused.code):
        raise ValueError(
            f"declared fused code {declared!r} disagrees with the labelled pair"
        )
    return labels


def load_dataset(path: str | Path) -> LoadResult:
    """Parse and validate a dataset file; see the module docstring for the
    hard-error vs per-row-rejection split."""
    records: list[DatasetRecord] = []
    rejected: list[RowDiagnostic] = []
    split_counts: dict[str, int] = {}
    seen_ids: set[str] = set()
    dim: int | None = None

    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {line_no}: invalid JSON ({exc.msg})") from None
            try:
                case_id = str(doc["case_id"])
                features = tuple(float(v) for v in doc["features"])
                split = doc["split"]
            except (KeyError, TypeError, ValueError) as exc:
                raise DatasetError(f"line {line_no}: malformed record ({exc})") from None
            if split not in SPLITS:
                raise DatasetError(f"line {line_no}: unknown split {split!r}")
            if not features or any(not math.isfinite(v) for v in features):
                raise DatasetError(f"line {line_no}: non-finite or empty feature vector")
            if dim is None:
                dim = len(features)
            elif len(features) != dim:
                raise DatasetError(
                    f"line {line_no}: feature dimension {len(features)} != {dim} seen earlier"
                )
            if case_id in seen_ids:
                raise DatasetError(f"line {line_no}: duplicate case_id {case_id!r}")
            seen_ids.add(case_id)

            labels = None
            if doc.get("labels"):
                try:
                    labels = _parse_labels(doc["labels"])
                except ForbiddenCombinationError:
                    rejected.append(
                        RowDiagnostic(line_no, case_id, "forbidden echo/posterior pair (code 00)")
                    )
                    continue
                except (LexiconError, ValueError) as exc:
                    rejected.append(RowDiagnostic(line_no, case_id, str(exc)))
                    continue
            records.append(
                DatasetRecord(
                    case_id=case_id,
                    features=features,
                    split=split,
                    labels=labels,
                    source=doc.get("source", "unknown"),
                    feature_provenance=doc.get("feature_provenance", "external_embedding"),
                )
            )
            split_counts[split] = split_counts.get(split, 0) + 1
    return LoadResult(records=records, split_counts=split_counts, rejected=rejected, dim=dim)


def case_from_record(record: DatasetRecord, triage: Triage = Triage.LESION) -> CaseRecord:
    """Lift a dataset row into a pipeline case (triage is provider input)."""
    return CaseRecord(
        case_id=record.case_id,
        feature_vector=FeatureVector(record.features, record.feature_provenance),
        triage=triage,
        review=ReviewState.UNREVIEWED,
        version=1,
    )


# ---------------------------------------------------------------------------
# synthetic generator


#: class priors baked into the generator (referenced by the marginal tests)
SYNTHETIC_PRIORS = {
    "malignant": 0.5,
    "oval_round": 0.6,
    "fused": {"01": 0.30, "10": 0.35, "11": 0.35},
    "fused_with_00": {"00": 0.10, "01": 0.27, "10": 0.315, "11": 0.315},
}

_FEATURE_NOISE = 0.35
_AMPLITUDES = {"malignancy": 2.5, "shape": 2.2, "posterior_acoustic": 2.4, "internal_echo": 2.2}


@dataclass(frozen=True)
class SyntheticConfig:
    """Shape of one synthetic corpus.

    noise is the label-flip probability. For the echo/posterior pair under
    enforce_rule the noise moves the pair to one of the other two admissible
    codes (never 00); without enforce_rule the bits flip independently and
    the ground-truth prior includes the 00 combination, which downstream
    loading rejects.

    echo_readable picks the echo geometry. True (default): the echo texture
    has its own strong feature direction, so every attribute satisfies the
    separation guarantee below. False: the echo texture channel is absent
    and the three joint classes sit collinearly on the posterior axis, so
    the echo identity of a lesion is implied only by its posterior context;
    a binary echo classifier then faces a one-dimensional
    middle-against-both-ends split that no linear rule can solve, while the
    joint three-class route stays linearly solvable. This reproduces, in
    controllable form, a near-random marginal echo channel.
    """

    n: int
    d: int = 16
    noise: float = 0.05
    geometry_seed: int = 0
    enforce_rule: bool = True
    echo_readable: bool = True
    train_fraction: float = 0.7

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.d < 4:
            raise ValueError("d must be at least 4 (one direction per attribute)")
        if not (0.0 <= self.noise < 0.5):
            raise ValueError("noise must lie in [0, 0.5)")
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("train_fraction must lie in (0, 1)")


def _directions(config: SyntheticConfig) -> np.ndarray:
    """Four orthonormal class-geometry directions drawn from the geometry seed."""
    rng = np.random.default_rng(config.geometry_seed)
    basis, _ = np.linalg.qr(rng.standard_normal((config.d, 4)))
    return basis.T  # rows: malignancy, shape, posterior, echo


def synthesize_dataset(config: SyntheticConfig, seed: int) -> list[DatasetRecord]:
    """Generate a labelled corpus with well-separated class geometry.

    Reproducible: the same (config, seed) yields the identical record list.
    """
    rng = np.random.default_rng(seed)
    directions = _directions(config)
    amp = dict(_AMPLITUDES)

    pair_priors = (
        SYNTHETIC_PRIORS["fused"] if config.enforce_rule else SYNTHETIC_PRIORS["fused_with_00"]
    )
    pair_codes = sorted(pair_priors)
    pair_p = np.array([pair_priors[c] for c in pair_codes])

    records = []
    for i in range(config.n):
        malignant = rng.random() < SYNTHETIC_PRIORS["malignant"]
        oval = rng.random() < SYNTHETIC_PRIORS["oval_round"]
        code = pair_codes[rng.choice(len(pair_codes), p=pair_p)]
        no_posterior = code[0] == "1"
        anechoic = code[1] == "1"

        if config.echo_readable:
            posterior_coord = amp["posterior_acoustic"] * (1.0 if no_posterior else -1.0)
            echo_coord = amp["internal_echo"] * (1.0 if anechoic else -1.0)
        else:
            # collinear joint-class geometry: enhancement+anechoic at -A,
            # no-posterior+homogeneous at 0, no-posterior+anechoic at +A;
            # the echo texture axis carries nothing
            if not no_posterior:
                posterior_coord = -amp["posterior_acoustic"]
            elif anechoic:
                posterior_coord = amp["posterior_acoustic"]
            else:
                posterior_coord = 0.0
            echo_coord = 0.0
        coords = np.array(
            [
                amp["malignancy"] * (1.0 if malignant else -1.0),
                amp["shape"] * (1.0 if oval else -1.0),
                posterior_coord,
                echo_coord,
            ]
        )
        x = coords @ directions + _FEATURE_NOISE * rng.standard_normal(config.d)

        # observed labels: symmetric flips at the configured rate
        if rng.random() < config.noise:
            malignant = not malignant
        if rng.random() < config.noise:
            oval = not oval
        if config.enforce_rule:
            if rng.random() < config.noise:
                others = [c for c in pair_codes if c != code]
                code = others[rng.integers(len(others))]
        else:
            bits = list(code)
            if rng.random() < config.noise:
                bits[0] = "0" if bits[0] == "1" else "1"
            if rng.random() < config.noise:
                bits[1] = "0" if bits[1] == "1" else "1"
            code = "".join(bits)
        no_posterior = code[0] == "1"
        anechoic = code[1] == "1"

        labels = DatasetLabels(
            malignancy="malignant" if malignant else "benign",
            shape=Shape.OVAL_ROUND if oval else Shape.IRREGULAR,
            internal_echo=InternalEcho.ANECHOIC if anechoic else InternalEcho.HOMOGENEOUS,
            posterior_acoustic=(
                PosteriorAcoustic.NO_POSTERIOR_FEATURES
                if no_posterior
                else PosteriorAcoustic.ENHANCEMENT
            ),
        )
        split = "train" if rng.random() < config.train_fraction else "validation"
        records.append(
            DatasetRecord(
                case_id=f"syn-{i:05d}",
                features=tuple(float(v) for v in x),
                split=split,
                labels=labels,
                source="synthetic",
                feature_provenance="synthetic",
            )
        )
    return records


# ---------------------------------------------------------------------------
# label extraction helpers shared by training code and the CLI

TARGETS = ("malignancy", "shape", "internal_echo", "posterior_acoustic")

#: the label value encoded as +1 for each binary target
POSITIVE_LABELS = {
    "malignancy": "malignant",
    "shape": Shape.OVAL_ROUND.value,
    "internal_echo": InternalEcho.ANECHOIC.value,
    "posterior_acoustic": PosteriorAcoustic.NO_POSTERIOR_FEATURES.value,
}


def _label_token(labels: DatasetLabels, target: str) -> str | None:
    if target == "malignancy":
        return labels.malignancy
    value = getattr(labels, target)
    return value.value if value is not None else None


def binary_arrays(
    records: Sequence[DatasetRecord], target: str, split: str | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """(X, y in {-1, +1}) for one binary target, skipping unlabelled rows."""
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}")
    xs, ys = [], []
    positive = POSITIVE_LABELS[target]
    for record in records:
        if split is not None and record.split != split:
            continue
        if record.labels is None:
            continue
        token = _label_token(record.labels, target)
        if token is None:
            continue
        xs.append(record.features)
        ys.append(1.0 if token == positive else -1.0)
    if not xs:
        raise ValueError(f"no labelled rows for target {target!r}")
    return np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)


def fused_arrays(
    records: Sequence[DatasetRecord], split: str | None = None
) -> tuple[np.ndarray, list[str]]:
    """(X, fused code strings) for rows where the joint label is derivable."""
    xs, codes = [], []
    for record in records:
        if split is not None and record.split != split:
            continue
        if record.labels is None:
            continue
        fused = record.labels.fused()
        if fused is None:
            continue
        xs.append(record.features)
        codes.append(fused.code)
    if not xs:
        raise ValueError("no rows with a derivable fused label")
    return np.asarray(xs, dtype=float), codes
