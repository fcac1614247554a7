"""
Feature extractor forward/backward
"""
import numpy as np
import pytest

from app.core.exceptions import ArgumentError
from app.training import extractor as fx


def numeric_param_grad(ext, x, dz, step=1e-6):
    grad = np.zeros_like(ext.params)
    for k in range(ext.params.shape[0]):
        plus = ext.params.copy()
        minus = ext.params.copy()
        plus[k] += step
        minus[k] -= step
        f_plus = np.dot(dz, fx.forward(fx.FeatureExtractor(ext.config, plus), x)[0])
        f_minus = np.dot(dz, fx.forward(fx.FeatureExtractor(ext.config, minus), x)[0])
        grad[k] = (f_plus - f_minus) / (2 * step)
    return grad


@pytest.mark.parametrize("architecture,expected", [("affine", 5 * 3 + 5), ("mlp", 4 * 3 + 4 + 5 * 4 + 5)])
def test_parameter_count(architecture, expected):
    cfg = fx.ExtractorConfig(architecture=architecture, input_dim=3, output_dim=5, hidden=4)
    assert fx.parameter_count(cfg) == expected


def test_init_biases_zero(rng):
    ext = fx.init(fx.ExtractorConfig(input_dim=3, output_dim=2), rng)
    _, b = ext.layers()[0]
    assert np.all(b == 0.0)
    w, _ = ext.layers()[0]
    assert np.all(np.abs(w) <= 1 / np.sqrt(3))


def test_forward_range(rng):
    ext = fx.init(fx.ExtractorConfig(input_dim=4, output_dim=6), rng)
    z, _ = fx.forward(ext, rng.normal(scale=50.0, size=4))
    assert z.shape == (6,)
    assert np.all(np.abs(z) <= np.pi)


def test_forward_zero_params_zero_angles():
    cfg = fx.ExtractorConfig(input_dim=2, output_dim=3)
    z, _ = fx.forward(fx.FeatureExtractor(cfg, np.zeros(fx.parameter_count(cfg))), [0.4, 0.9])
    np.testing.assert_array_equal(z, np.zeros(3))


@pytest.mark.parametrize("architecture", ["affine", "mlp"])
def test_backward_matches_finite_differences(rng, architecture):
    cfg = fx.ExtractorConfig(architecture=architecture, input_dim=4, output_dim=3, hidden=5)
    ext = fx.init(cfg, rng)
    x = rng.uniform(0, 1, 4)
    dz = rng.normal(size=3)
    _, cache = fx.forward(ext, x)
    d_params, _ = fx.backward(ext, cache, dz)
    np.testing.assert_allclose(d_params, numeric_param_grad(ext, x, dz), atol=1e-6)


def test_backward_input_gradient(rng):
    ext = fx.init(fx.ExtractorConfig(input_dim=3, output_dim=2), rng)
    x = rng.uniform(0, 1, 3)
    dz = np.array([1.0, -0.5])
    _, cache = fx.forward(ext, x)
    _, d_x = fx.backward(ext, cache, dz)
    step = 1e-6
    for k in range(3):
        e = np.zeros(3)
        e[k] = step
        numeric = (np.dot(dz, fx.forward(ext, x + e)[0]) - np.dot(dz, fx.forward(ext, x - e)[0])) / (2 * step)
        assert d_x[k] == pytest.approx(numeric, abs=1e-6)


def test_wrong_parameter_count():
    with pytest.raises(ArgumentError):
        fx.FeatureExtractor(fx.ExtractorConfig(input_dim=2, output_dim=2), np.zeros(5))


def test_wrong_input_length(rng):
    ext = fx.init(fx.ExtractorConfig(input_dim=2, output_dim=2), rng)
    with pytest.raises(ArgumentError):
        fx.forward(ext, np.zeros(3))
