"""Breast ultrasound screening report pipeline.

Classifies lesion descriptor features with a from-scratch SMO-trained SVM,
fuses the correlated echo/posterior descriptors over their admissible joint
classes, assembles structured preliminary reports by rule, applies doctor
reviews under optimistic versioning, and evaluates everything (confusion
counts, F-beta, ROC/AUC, pooled work-efficiency index).
"""

from .data import (
    DatasetError,
    DatasetLabels,
    DatasetRecord,
    LoadResult,
    SyntheticConfig,
    binary_arrays,
    case_from_record,
    fused_arrays,
    load_dataset,
    save_dataset,
    synthesize_dataset,
)
from .fusion import (
    ForbiddenCombinationError,
    FusedClass,
    FusedPrediction,
    fuse_labels,
    predict_fused,
    predict_fused_one,
    unfuse,
)
from .lexicon import (
    Boundary,
    InternalEcho,
    LexiconError,
    Margin,
    Orientation,
    PosteriorAcoustic,
    Shape,
    descriptor_term,
    descriptor_value,
)
from .metrics import (
    ConfusionMatrix,
    MetricSet,
    MetricsRow,
    RocCurve,
    WeightedEntry,
    classification_metrics,
    confusion_matrix,
    efficiency_index,
    f_beta_score,
    metrics_table,
    roc_auc,
    roc_export,
    weighted_average,
)
from .records import (
    CaseRecord,
    FeatureVector,
    Laterality,
    ReviewState,
    Triage,
    ValidationError,
    VersionConflictError,
    validate_case,
)
from .reports import (
    FinalReport,
    PreliminaryReport,
    Provenance,
    ReportField,
    Route,
    Verdict,
    apply_review,
    generate_preliminary,
    render_report,
    triage_route,
)
from .service import ApiError, ModelBundle, ReportService, run_server
from .store import CaseStore, UnknownCaseError
from .svm import (
    ConvergenceError,
    KernelSpec,
    OvrModel,
    SvmModel,
    TrainConfig,
    decision_value,
    decision_values,
    dual_objective,
    fit_calibration,
    load_model,
    predict_score,
    predict_scores,
    save_model,
    train_ovr,
    train_svm,
)

__version__ = "0.1.0"
