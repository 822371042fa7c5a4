#!/usr/bin/env python3
"""Train a malignancy classifier on synthetic screening data and evaluate it.

Usage:
    python demos/01_train_and_evaluate.py

Walks the core classification loop:
1. synthesize a seeded labelled corpus,
2. train the SMO-based SVM on the train split,
3. score the validation split,
4. print the confusion counts, threshold metrics and AUC.
"""

import numpy as np

from sonoreport.data import SyntheticConfig, binary_arrays, synthesize_dataset
from sonoreport.metrics import classification_metrics, confusion_matrix, roc_auc
from sonoreport.svm import KernelSpec, TrainConfig, predict_scores, train_svm


def main():
    # 1. a reproducible stand-in corpus (500 cases, 5% label noise)
    records = synthesize_dataset(SyntheticConfig(n=500, noise=0.05), seed=7)
    print(f"synthesized {len(records)} cases")

    # 2. train on the train split
    x_train, y_train = binary_arrays(records, "malignancy", split="train")
    model = train_svm(
        x_train,
        y_train,
        TrainConfig(C=1.0, tol=1e-3),
        KernelSpec("linear"),
        target="malignancy",
        positive_label="malignant",
    )
    print(f"trained on {len(y_train)} rows, kept {len(model.coeffs)} support vectors")

    # 3. score held-out cases
    x_val, y_val = binary_arrays(records, "malignancy", split="validation")
    scores = predict_scores(model, x_val)
    predictions = np.where(scores >= 0.5, 1.0, -1.0)

    # 4. the usual report card
    cm = confusion_matrix(list(predictions), list(y_val), positive=1.0)
    metrics = classification_metrics(cm, beta=0.9)
    curve = roc_auc(scores, (y_val == 1.0).astype(int))
    print(f"confusion: tp={cm.tp} fp={cm.fp} fn={cm.fn} tn={cm.tn}")
    print(
        f"accuracy={metrics.accuracy:.4f} precision={metrics.precision:.4f} "
        f"recall={metrics.recall:.4f} f_beta={metrics.f_beta:.4f} auc={curve.auc:.4f}"
    )


if __name__ == "__main__":
    main()
