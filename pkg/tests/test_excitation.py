import numpy as np
import pytest

from blindcomm.errors import ConfigError, DegenerateDataError
from blindcomm.excitation import (ExcitationSource, ExcitationSpec, adversarial_basis,
                                  draw_excitation, excitation_variance)
from blindcomm.graph_model import PpmParams, expected_adjacency, model_labels


def source(kind, n=20, seed=0, **kw):
    spec = ExcitationSpec(kind, **kw)
    if kind == "adversarial":
        params = PpmParams(n, 2, n * 0.5, n * 0.1)
        ea = expected_adjacency(params, model_labels(params))
        return ExcitationSource(spec, n, np.random.default_rng(seed), expected_adjacency=ea, k=2)
    return ExcitationSource(spec, n, np.random.default_rng(seed))


def test_uniform_moments():
    w = source("whiteUniform", n=1).draw(np.random.default_rng(1), 100_000)
    assert abs(w.mean()) <= 0.01
    assert abs(w.var() - 1 / 3) <= 0.01
    assert np.all(np.abs(w) <= 1)


def test_uniform_unit_variance_flag():
    w = source("whiteUniform", n=1, unit_variance=True).draw(np.random.default_rng(1), 100_000)
    assert abs(w.var() - 1.0) <= 0.02
    assert excitation_variance(ExcitationSpec("whiteUniform", unit_variance=True)) == 1.0


def test_gaussian_covariance_concentrates():
    n, m = 20, 10_000
    w = source("whiteGaussian", n=n).draw(np.random.default_rng(2), m)
    c = w @ w.T / m
    assert np.linalg.norm(c - np.eye(n), 2) <= 5 * np.sqrt(n / m)


@pytest.mark.parametrize("p,rank", [(30, 20), (20, 20), (7, 7), (1, 1)])
def test_wishart_rank(p, rank):
    cov = source("wishart", n=20, p=p).covariance()
    assert np.linalg.matrix_rank(cov) == rank


def test_wishart_normalization():
    big = source("wishart", n=10, p=200_000, seed=3).covariance()
    assert np.linalg.norm(big - np.eye(10), 2) < 0.05
    raw = source("wishart", n=10, p=50, seed=3, raw_wishart=True).covariance()
    scaled = source("wishart", n=10, p=50, seed=3).covariance()
    np.testing.assert_allclose(raw, 50 * scaled)


def test_adversarial_eigenvalues():
    src = source("adversarial", n=40)
    vals = np.sort(np.linalg.eigvalsh(src.covariance()))
    np.testing.assert_allclose(vals[:2], 0.01, atol=1e-10)
    np.testing.assert_allclose(vals[2:], 0.81, atol=1e-10)


def test_adversarial_low_variance_on_communities():
    src = source("adversarial", n=40)
    params = PpmParams(40, 2, 20, 4)
    gt = model_labels(params).normalized
    np.testing.assert_allclose(gt.T @ src.covariance() @ gt, 0.01 * np.eye(2), atol=1e-10)


def test_adversarial_needs_gap():
    with pytest.raises(DegenerateDataError):
        adversarial_basis(np.full((6, 6), 0.3), 2)
    with pytest.raises(ValueError):
        adversarial_basis(np.eye(3), 3)


def test_diagonal_coloring_fixed_across_draws():
    src = source("diagonal", n=5, seed=4)
    scale = src.scale.copy()
    src.draw(np.random.default_rng(0), 100)
    np.testing.assert_array_equal(src.scale, scale)
    assert np.all((scale >= 0) & (scale <= 1))


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["whiteUniform", "whiteGaussian", "diagonal", "wishart", "adversarial"])
def test_zero_mean_and_covariance(kind):
    n, m = 6, 100_000
    kw = {"p": 3} if kind == "wishart" else {}
    src = source(kind, n=n, seed=7, **kw)
    w = src.draw(np.random.default_rng(8), m)
    cov = src.covariance()
    se = np.sqrt(np.diag(cov) / m)
    assert np.all(np.abs(w.mean(axis=1)) <= 4 * se + 1e-15)
    emp = w @ w.T / m
    assert np.abs(emp - cov).max() <= 0.02 * max(1.0, np.abs(cov).max())


def test_single_draw_shape():
    assert source("whiteGaussian", n=7).draw(np.random.default_rng(0)).shape == (7,)
    assert draw_excitation(ExcitationSpec("diagonal"), 7, 0).shape == (7,)


def test_spec_validation_and_json():
    with pytest.raises(ValueError):
        ExcitationSpec("pink")
    with pytest.raises(ValueError):
        ExcitationSpec("wishart")
    spec = ExcitationSpec("wishart", p=5, unit_variance=True)
    assert ExcitationSpec.from_json(spec.to_json()) == spec
    with pytest.raises(ConfigError):
        ExcitationSpec.from_json({"kind": "wishart", "p": 0})


def test_adversarial_requires_model():
    with pytest.raises(ValueError):
        ExcitationSource(ExcitationSpec("adversarial"), 10, 0)
