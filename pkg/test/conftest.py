"""
Shared fixtures: a small pyramid (96x72 source, 24px windows, 17 patches) and
a tiny synthetic corpus so end-to-end tests run in seconds on CPU.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from core.config import BackboneSpec, PipelineConfig, ScheduleSpec  # noqa: E402
from corpus.synthetic import generate_synthetic_corpus  # noqa: E402
from patching import PyramidSpec  # noqa: E402

SMALL_PYRAMID = PyramidSpec(((96, 72), (48, 48), (24, 24)), window_size=24, stride=24)
SMALL_PYRAMID_FLAGS = ["--pyramid", "96x72,48x48,24x24", "--window", "24"]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale acceptance runs (set PATCHLABEL_RUN_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if os.getenv("PATCHLABEL_RUN_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="set PATCHLABEL_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def small_config():
    def make(strategy="ip", num_classes=3, class_names=None, **overrides):
        names = class_names or (["normal"] + [f"type_{i}" for i in range(1, num_classes)])
        return PipelineConfig(
            strategy=strategy,
            class_names=names,
            backbone=BackboneSpec("tiny"),
            pyramid=SMALL_PYRAMID,
            load_dotenv_file=False,
            **overrides,
        )
    return make


@pytest.fixture
def small_schedule():
    def make(**overrides):
        settings = dict(total_epochs=2, batch_size=4, seed=0, optimizer="adam", num_workers=0,
                        deterministic=True, validation_fraction=0.0, augment=True, device="cpu")
        settings.update(overrides)
        return ScheduleSpec(load_dotenv_file=False, **settings)
    return make


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """3 classes (normal, alligator, crack_pouring) x 6 images at 96x72, half train / half test"""
    out = tmp_path_factory.mktemp("corpus")
    return generate_synthetic_corpus(out, n_per_class=6, num_classes=3, dims=(96, 72), seed=0, workers=2)
