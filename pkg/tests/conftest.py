"""
Shared fixtures
"""
import os
import tempfile

# settings are read at import time; point the registry at a throwaway database
_DB_DIR = tempfile.mkdtemp(prefix="lab-tests-")
os.environ.setdefault("DATABASE_URL", f"sqlite:///{_DB_DIR}/lab_test.db")
os.environ.setdefault("PERSIST_RESULTS", "false")
os.environ.setdefault("NOISE_TRAJECTORIES", "200")

import numpy as np
import pytest

from app.core.random import stream
from app.quantum.circuits import build_ansatz, build_encoder, compose
from app.schemas.experiment import build_config
from app.services.dataset_service import synth_blobs
from app.training.extractor import ExtractorConfig
from app.training.model import build_model


@pytest.fixture
def rng():
    return stream(1234, "tests")


@pytest.fixture
def small_circuit():
    return compose(build_encoder(3, 6), build_ansatz(3, 2))


@pytest.fixture
def blobs():
    return synth_blobs(4, 8, 20, 0.1, seed=7)


def make_model(head="yomo", n_q=4, n_blocks=2, n_classes=4, input_dim=6, n_features=None, seed=0, **kwargs):
    cfg = ExtractorConfig(input_dim=input_dim, output_dim=n_features or n_q, architecture=kwargs.pop("architecture", "affine"))
    return build_model(head, n_q, n_blocks, n_classes, cfg, stream(seed, "model"), **kwargs)


@pytest.fixture
def yomo_model():
    return make_model("yomo")


@pytest.fixture
def vanilla_model():
    return make_model("vanilla")


@pytest.fixture
def quick_config(tmp_path):
    """Tiny synthetic experiment that trains in seconds."""
    return build_config({
        "head": "yomo",
        "n_q": 4,
        "n_blocks": 2,
        "n_classes": 4,
        "synth_dim": 8,
        "synth_per_class": 10,
        "synth_spread": 0.1,
        "epochs": 2,
        "batch_size": 16,
        "shots": [1, "inf"],
        "repeats": 2,
        "seeds": [0],
        "trajectories": 20,
        "out_dir": str(tmp_path / "runs"),
    })
