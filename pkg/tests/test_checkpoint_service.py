"""
Binary checkpoint format
"""
import struct

import numpy as np
import pytest

from app.core.exceptions import DataFormatError
from app.schemas.experiment import build_config
from app.services import checkpoint_service
from app.services.checkpoint_service import (
    MAGIC,
    check_compatible,
    checkpoint_from_model,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    restore_model,
    save_checkpoint,
)
from app.services.training_service import init_model


@pytest.fixture
def checkpoint():
    config = build_config({"n_q": 4, "n_blocks": 2, "n_classes": 4, "epochs": 1})
    model = init_model(config, input_dim=8, seed=3)
    return checkpoint_from_model(model, config, 3, 8, 1, 1.25, "abc123")


def test_layout_starts_with_magic_and_version(checkpoint):
    blob = encode_checkpoint(checkpoint)
    magic, version, header_len = struct.unpack_from("<8sII", blob, 0)
    assert magic == MAGIC
    assert version == checkpoint_service.FORMAT_VERSION
    n_params = checkpoint.extractor_params.shape[0] + checkpoint.theta.shape[0]
    assert len(blob) == 16 + header_len + 8 * n_params


def test_decode_restores_everything(checkpoint):
    restored = decode_checkpoint(encode_checkpoint(checkpoint))
    assert restored.run_id == checkpoint.run_id
    assert restored.seed == 3
    assert restored.final_loss == 1.25
    assert restored.history_digest == "abc123"
    assert restored.config.training_echo() == checkpoint.config.training_echo()
    np.testing.assert_array_equal(restored.extractor_params, checkpoint.extractor_params)
    np.testing.assert_array_equal(restored.theta, checkpoint.theta)


def test_encoding_is_byte_stable(checkpoint):
    assert encode_checkpoint(checkpoint) == encode_checkpoint(decode_checkpoint(encode_checkpoint(checkpoint)))


def test_restored_model_scores_match(checkpoint, blobs):
    config = checkpoint.config
    original = init_model(config, input_dim=8, seed=3)
    restored = restore_model(decode_checkpoint(encode_checkpoint(checkpoint)))
    _, test = blobs
    for x in test.inputs[:5]:
        np.testing.assert_array_equal(restored.scores(x), original.scores(x))


def test_save_and_load(checkpoint, tmp_path):
    path = save_checkpoint(checkpoint, tmp_path / "nested" / "checkpoint.bin")
    assert load_checkpoint(path).run_id == checkpoint.run_id


@pytest.mark.parametrize("corrupt", [
    lambda b: b"NOTACKPT" + b[8:],
    lambda b: b[:8] + struct.pack("<I", 99) + b[12:],
    lambda b: b[:10],
    lambda b: b[:-3],
    lambda b: b + b"\x00" * 8,
    lambda b: b[:16] + b"X" + b[17:],
])
def test_corrupted_checkpoints(checkpoint, corrupt):
    with pytest.raises(DataFormatError):
        decode_checkpoint(corrupt(encode_checkpoint(checkpoint)))


def test_missing_file(tmp_path):
    with pytest.raises(DataFormatError):
        load_checkpoint(tmp_path / "absent.bin")


def test_compatibility_checks_explicit_fields_only(checkpoint):
    check_compatible(checkpoint, build_config({"shots": [1]}))
    check_compatible(checkpoint, build_config({"n_q": 4}))
    with pytest.raises(DataFormatError, match="n_q"):
        check_compatible(checkpoint, build_config({"n_q": 5}))
