import pytest

from sonoreport.data import SyntheticConfig, binary_arrays, fused_arrays, synthesize_dataset
from sonoreport.svm import KernelSpec, TrainConfig, train_ovr, train_svm


@pytest.fixture(scope="session")
def corpus():
    """Small seeded corpus shared by the model-hungry tests."""
    return synthesize_dataset(SyntheticConfig(n=240, noise=0.05, geometry_seed=3), seed=11)


@pytest.fixture(scope="session")
def trained(corpus):
    config = TrainConfig()
    kernel = KernelSpec("linear")
    xm, ym = binary_arrays(corpus, "malignancy", split="train")
    xs, ys = binary_arrays(corpus, "shape", split="train")
    xf, codes = fused_arrays(corpus, split="train")
    return {
        "malignancy": train_svm(xm, ym, config, kernel, target="malignancy",
                                positive_label="malignant"),
        "shape": train_svm(xs, ys, config, kernel, target="shape",
                           positive_label="oval_round"),
        "fused": train_ovr(xf, codes, config, kernel, target="fused"),
    }
