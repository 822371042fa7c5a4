"""Batch entry points: synthesize data, train models, evaluate, draft reports, serve.

Every run is reproducible: randomness enters only through --seed, training
canonicalizes its input order, and all artifacts (model files, metrics
tables, rendered reports, dataset files) are byte-identical across runs with
identical flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .data import (
    DatasetError,
    POSITIVE_LABELS,
    SyntheticConfig,
    TARGETS,
    binary_arrays,
    case_from_record,
    fused_arrays,
    load_dataset,
    save_dataset,
    synthesize_dataset,
)
from .fusion import predict_fused_one
from .lexicon import Shape
from .metrics import (
    MetricSet,
    MetricsRow,
    classification_metrics,
    confusion_matrix,
    metrics_table,
    roc_auc,
    roc_export,
)
from .records import Triage
from .reports import generate_preliminary, render_report
from .service import ModelBundle, ReportService, run_server
from .store import CaseStore
from .svm import (
    ConvergenceError,
    KernelSpec,
    OvrModel,
    SvmModel,
    TrainConfig,
    load_model,
    predict_score,
    predict_scores,
    save_model,
    train_ovr,
    train_svm,
)


def _kernel_from_args(args) -> KernelSpec:
    if args.kernel == "rbf":
        return KernelSpec("rbf", args.gamma)
    if args.gamma is not None:
        raise ValueError("--gamma applies to the rbf kernel only")
    return KernelSpec("linear")


def _config_from_args(args) -> TrainConfig:
    weights = None if args.class_weights == "none" else "balanced"
    return TrainConfig(
        C=args.c, tol=args.tol, max_passes=args.max_passes, class_weights=weights, seed=args.seed
    )


def _cmd_simulate_data(args) -> int:
    config = SyntheticConfig(
        n=args.n,
        d=args.d,
        noise=args.noise,
        geometry_seed=args.geometry_seed,
        enforce_rule=args.enforce_rule,
        echo_readable=args.echo_readable,
        train_fraction=args.train_fraction,
    )
    records = synthesize_dataset(config, args.seed)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_dataset(records, args.out)
    counts: dict[str, int] = {}
    for record in records:
        counts[record.split] = counts.get(record.split, 0) + 1
    print(f"wrote {len(records)} records to {args.out} (splits: {counts})")
    return 0


def _cmd_train_svm(args) -> int:
    result = load_dataset(args.data)
    x, y = binary_arrays(result.records, args.target, split=args.split)
    model = train_svm(
        x,
        y,
        _config_from_args(args),
        _kernel_from_args(args),
        target=args.target,
        positive_label=POSITIVE_LABELS[args.target],
    )
    Path(args.model_out).parent.mkdir(parents=True, exist_ok=True)
    save_model(model, args.model_out)
    print(
        f"trained {args.target} model on {len(y)} rows "
        f"({len(model.coeffs)} support vectors) -> {args.model_out}"
    )
    return 0


def _cmd_train_fusion(args) -> int:
    result = load_dataset(args.data)
    x, codes = fused_arrays(result.records, split=args.split)
    model = train_ovr(x, codes, _config_from_args(args), _kernel_from_args(args), target="fused")
    Path(args.model_out).parent.mkdir(parents=True, exist_ok=True)
    save_model(model, args.model_out)
    print(f"trained fused model on {len(codes)} rows -> {args.model_out}")
    return 0


def _binary_rows(model: SvmModel, records, split: str, beta: float):
    target = model.target or "malignancy"
    x, y = binary_arrays(records, target, split=split)
    scores = predict_scores(model, x)
    preds = np.where(scores >= 0.5, 1.0, -1.0)
    cm = confusion_matrix(list(preds), list(y), positive=1.0)
    curve = roc_auc(scores, (y == 1.0).astype(int))
    row = MetricsRow(
        model=target,
        feature=target,
        split=split,
        n=len(y),
        metrics=classification_metrics(cm, beta=beta),
        auc=curve.auc,
    )
    return [row], {target: curve}


def _fused_rows(model: OvrModel, records, split: str, beta: float):
    x, codes = fused_arrays(records, split=split)
    preds = model.predict(x)
    score_mat = model.score_matrix(x)
    norm = score_mat / score_mat.sum(axis=1, keepdims=True)
    rows = []
    curves = {}
    marginals = {
        "internal_echo_fused": (lambda c: c[1] == "1", norm[:, 0] + norm[:, 2]),
        "posterior_acoustic_fused": (lambda c: c[0] == "1", norm[:, 1] + norm[:, 2]),
    }
    for feature, (is_positive, pos_scores) in marginals.items():
        pred_bits = [1.0 if is_positive(c) else -1.0 for c in preds]
        true_bits = [1.0 if is_positive(c) else -1.0 for c in codes]
        cm = confusion_matrix(pred_bits, true_bits, positive=1.0)
        curve = roc_auc(pos_scores, [1 if b == 1.0 else 0 for b in true_bits])
        curves[feature] = curve
        rows.append(
            MetricsRow(
                model="fused",
                feature=feature,
                split=split,
                n=len(codes),
                metrics=classification_metrics(cm, beta=beta),
                auc=curve.auc,
            )
        )
    joint_acc = sum(1 for p, t in zip(preds, codes) if p == t) / len(codes)
    rows.append(
        MetricsRow(
            model="fused",
            feature="fused_code",
            split=split,
            n=len(codes),
            metrics=MetricSet(
                accuracy=joint_acc, precision=None, recall=None, f_beta=None, beta=beta
            ),
            auc=None,
        )
    )
    return rows, curves


def _cmd_evaluate(args) -> int:
    rows = []
    curves = {}
    if args.confusion_fixture:
        fixture = json.loads(Path(args.confusion_fixture).read_text())
        from .metrics import ConfusionMatrix

        cm = ConfusionMatrix(
            tp=int(fixture["tp"]), fp=int(fixture["fp"]), fn=int(fixture["fn"]), tn=int(fixture["tn"])
        )
        rows.append(
            MetricsRow(
                model=str(fixture.get("name", "fixture")),
                feature=str(fixture.get("feature", "malignancy")),
                split="fixture",
                n=cm.total,
                metrics=classification_metrics(cm, beta=args.beta),
                auc=None,
            )
        )
    if args.model_in:
        if not args.data:
            raise ValueError("--data is required when evaluating models")
        result = load_dataset(args.data)
        for path in args.model_in:
            model = load_model(path)
            if isinstance(model, OvrModel):
                new_rows, new_curves = _fused_rows(model, result.records, args.split, args.beta)
            else:
                new_rows, new_curves = _binary_rows(model, result.records, args.split, args.beta)
            rows.extend(new_rows)
            curves.update(new_curves)
    if not rows:
        raise ValueError("nothing to evaluate: give --model-in and/or --confusion-fixture")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(metrics_table(rows))
    print(f"wrote {len(rows)} metric rows to {args.out}")
    if args.roc_out:
        if args.roc_target not in curves:
            raise ValueError(
                f"--roc-target {args.roc_target!r} not among evaluated curves {sorted(curves)}"
            )
        Path(args.roc_out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.roc_out).write_text(roc_export(curves[args.roc_target]))
        print(f"wrote ROC points for {args.roc_target} to {args.roc_out}")
    return 0


def _load_bundle(args) -> ModelBundle:
    bundle = ModelBundle()
    if args.malignancy_model:
        bundle.malignancy = load_model(args.malignancy_model)
    if args.shape_model:
        bundle.shape = load_model(args.shape_model)
    if args.fused_model:
        bundle.fused = load_model(args.fused_model)
    return bundle


def _cmd_generate_reports(args) -> int:
    result = load_dataset(args.data)
    bundle = _load_bundle(args)
    if bundle.malignancy is None or bundle.shape is None or bundle.fused is None:
        raise ValueError("generate-reports needs --malignancy-model, --shape-model, --fused-model")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = 0
    for record in result.records:  # file order == submission order
        if args.split != "all" and record.split != args.split:
            continue
        case = case_from_record(record, triage=Triage.LESION)
        verdict = predict_score(bundle.malignancy, record.features)
        shape_pred = fused_pred = None
        if verdict < args.threshold:
            shape_score = predict_score(bundle.shape, record.features)
            shape_pred = Shape.OVAL_ROUND if shape_score >= 0.5 else Shape.IRREGULAR
            fused_pred = predict_fused_one(bundle.fused, record.features)
        report = generate_preliminary(
            case, shape_pred, fused_pred, verdict, args.threshold, now_ms=0
        )
        (out_dir / f"{record.case_id}.txt").write_text(render_report(report))
        written += 1
    print(f"wrote {written} reports to {out_dir}")
    return 0


def _cmd_serve(args) -> int:
    store = CaseStore(args.store)
    bundle = _load_bundle(args)
    eval_records = None
    if args.data:
        result = load_dataset(args.data)
        eval_records = [r for r in result.records if r.split == args.eval_split]
        existing = {case.case_id for case in store.list_cases()}
        ingested = 0
        for record in result.records:
            if record.split != args.ingest_split or record.case_id in existing:
                continue
            store.put_case(case_from_record(record, triage=Triage.LESION))
            ingested += 1
        if ingested:
            print(f"ingested {ingested} cases from {args.data}")
    service = ReportService(
        store, bundle, threshold=args.threshold, eval_records=eval_records
    )
    server = run_server(service, args.host, args.port)
    host, port = server.server_address[:2]
    print(f"listening on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        store.close()
    return 0


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="dataset file (one JSON record per line)")
    parser.add_argument("--model-out", required=True)
    parser.add_argument("--split", default="train", choices=("train", "validation", "test"))
    parser.add_argument("--kernel", default="linear", choices=("linear", "rbf"))
    parser.add_argument("--c", type=float, default=1.0, help="box constraint")
    parser.add_argument("--gamma", type=float, default=None, help="rbf width (default 1/(d*var))")
    parser.add_argument("--tol", type=float, default=1e-3)
    parser.add_argument("--max-passes", type=int, default=200)
    parser.add_argument("--class-weights", default="balanced", choices=("balanced", "none"))
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sonoreport",
        description="Breast ultrasound screening report pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-data", help="write a seeded synthetic dataset file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=16)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--geometry-seed", type=int, default=0)
    p.add_argument("--echo-readable", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--enforce-rule", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate_data)

    p = sub.add_parser("train-svm", help="train one binary descriptor/verdict model")
    p.add_argument("--target", default="malignancy", choices=TARGETS)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train_svm)

    p = sub.add_parser("train-fusion", help="train the joint echo/posterior model")
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train_fusion)

    p = sub.add_parser("evaluate", help="write a metrics table (and optional ROC export)")
    p.add_argument("--data")
    p.add_argument("--model-in", action="append", default=[])
    p.add_argument("--split", default="validation", choices=("train", "validation", "test"))
    p.add_argument("--beta", type=float, default=0.9)
    p.add_argument("--confusion-fixture", help="JSON file with tp/fp/fn/tn counts")
    p.add_argument("--out", required=True)
    p.add_argument("--roc-out")
    p.add_argument("--roc-target", default="malignancy")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("generate-reports", help="render one preliminary report per case")
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="validation", choices=("train", "validation", "test", "all"))
    p.add_argument("--malignancy-model", required=True)
    p.add_argument("--shape-model", required=True)
    p.add_argument("--fused-model", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_generate_reports)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--store", default="case-store.log")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8642)
    p.add_argument("--malignancy-model")
    p.add_argument("--shape-model")
    p.add_argument("--fused-model")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--data", help="dataset file to ingest and evaluate against")
    p.add_argument("--ingest-split", default="validation", choices=("train", "validation", "test"))
    p.add_argument("--eval-split", default="validation", choices=("train", "validation", "test"))
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, ConvergenceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
