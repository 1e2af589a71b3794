import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modediagram import ModeDiagramClustering
from modediagram.delta import compute_delta
from modediagram.density import auto_bandwidth, kde_self
from modediagram.diagram import build_diagram
from modediagram.robustfit import (
    HUBER_T, MAD_CONSISTENCY, FitError, RobustFit, ThresholdFunction, fit_line, fit_report, fit_robust,
    mode_diagnostic, select_modes, threshold_value,
)


def ols(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    return intercept, slope


def test_noiseless_line():
    x = np.linspace(-3, 4, 10)
    for method in ("huber", "theil-sen"):
        fit = fit_line(x, 2 - 0.5 * x, method=method)
        assert fit.beta0 == pytest.approx(2, abs=1e-10)
        assert fit.beta1 == pytest.approx(-0.5, abs=1e-10)
        assert fit.s == pytest.approx(0, abs=1e-10)


def test_single_gross_outlier():
    x = np.linspace(-3, 4, 10)
    y = 2 - 0.5 * x
    y[6] += 10
    fit = fit_line(x, y)
    assert abs(fit.beta1 + 0.5) < 0.05
    assert abs(ols(x, y)[1] + 0.5) > abs(fit.beta1 + 0.5)


def test_huber_normal_equations(rng):
    x = rng.normal(size=300)
    y = 1 + 0.7 * x + rng.standard_t(2, size=300)
    fit = fit_line(x, y, max_iter=500)
    assert fit.converged
    r = fit.residuals(x, y)
    scale = MAD_CONSISTENCY * np.median(np.abs(r))
    u = np.abs(r) / scale
    w = np.where(u <= HUBER_T, 1.0, HUBER_T / u)
    # weighted normal equations hold up to the coefficient tolerance
    A = np.column_stack([np.ones_like(x), x])
    grad = A.T @ (w * r) / (A.T @ (w[:, None] * A)).diagonal()
    assert np.max(np.abs(grad)) < 1e-6


def test_fit_errors():
    with pytest.raises(FitError, match="at least 3"):
        fit_line([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(FitError, match="zero variance"):
        fit_line([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        fit_line([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], method="lasso")


def test_classic_scale_is_rms(rng):
    x = rng.normal(size=50)
    y = x + rng.normal(size=50)
    fit = fit_line(x, y, scale="classic")
    r = fit.residuals(x, y)
    assert fit.s == pytest.approx(math.sqrt((r @ r) / 48))


def test_threshold_value_examples():
    tf = ThresholdFunction(RobustFit(0.0, -0.5, 0.1), M=3)
    assert threshold_value(tf, 4.0) == pytest.approx(math.exp(0.3) / 2, rel=1e-14)
    assert threshold_value(tf, 4.0) == pytest.approx(0.6749294037880015)
    tf = ThresholdFunction(RobustFit(1.2, -0.3, 0.05), M=3)
    assert tf(1.0) == pytest.approx(math.exp(1.2 + 0.15))
    flat = ThresholdFunction(RobustFit(1.2, 0.0, 0.05))
    np.testing.assert_allclose(flat(np.array([0.1, 1.0, 10.0])), math.exp(1.35))
    with pytest.raises(ValueError):
        tf(0.0)


def _diagram(X):
    dens = kde_self(X, auto_bandwidth(X))
    return build_diagram(dens, compute_delta(X, dens))


def test_two_blobs_1d_two_modes(two_blobs_1d):
    X, _ = two_blobs_1d
    dia = _diagram(X)
    modes = select_modes(dia, ThresholdFunction(fit_robust(dia), 3.0))
    assert len(modes) == 2


def test_huge_M_leaves_only_root(two_blobs_1d):
    X, _ = two_blobs_1d
    dia = _diagram(X)
    modes = select_modes(dia, ThresholdFunction(fit_robust(dia), 1e12))
    assert modes.tolist() == [dia.root]


def test_oracle_slope_2d_normal():
    from modediagram.synthgen import ShapeSpec
    from modediagram.theoryval import slope_check

    assert -0.65 <= slope_check(ShapeSpec("gauss-pair", mu=0.0, d=2), n=20000, seed=1) <= -0.35


def test_mode_diagnostic(rng, two_blobs_1d):
    X = rng.normal(size=(200, 2))
    dens = kde_self(X, auto_bandwidth(X))
    top = int(np.argmax(dens.values))
    assert mode_diagnostic(X, dens, top, k=1)
    assert mode_diagnostic(X, dens, top, k=199)
    pts = np.array([[0.0], [1.0], [5.0]])
    assert not mode_diagnostic(pts, np.array([0.2, 0.5, 0.1]), 0, k=1)
    with pytest.raises(IndexError):
        mode_diagnostic(pts, np.ones(3), 3, k=1)
    with pytest.raises(ValueError):
        mode_diagnostic(pts, np.ones(3), 0, k=3)

    X, _ = two_blobs_1d
    est = ModeDiagramClustering().fit(X)
    assert est.n_clusters_ == 2
    assert all(mode_diagnostic(X, est.density_, m, k=10) for m in est.modes_)


fits = st.builds(
    RobustFit,
    beta0=st.floats(-5, 5), beta1=st.floats(-2, 2), s=st.floats(0.0, 2.0),
)


@settings(max_examples=100, deadline=None)
@given(fits, st.floats(0.1, 10), st.integers(0, 2**31))
def test_threshold_equivalence(fit, M, seed):
    r = np.random.default_rng(seed)
    density = np.exp(r.uniform(-8, 3, 100))
    delta = np.exp(r.uniform(-8, 3, 100))
    tf = ThresholdFunction(fit, M)
    resid = np.log(delta) - (fit.beta0 + fit.beta1 * np.log(density))
    np.testing.assert_array_equal(tf.above(density, delta), resid > M * fit.s)
    # linear-space comparison agrees away from the rounding band
    linear = delta > tf(density)
    clear = np.abs(resid - M * fit.s) > 1e-9
    np.testing.assert_array_equal(linear[clear], (resid > M * fit.s)[clear])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.5, 5), st.floats(0.1, 5))
def test_mode_set_monotone_in_M(seed, m1, gap):
    r = np.random.default_rng(seed)
    X = np.concatenate([r.normal(size=(60, 2)), r.normal(size=(40, 2)) + 5])
    dia = _diagram(X)
    fit = fit_robust(dia)
    low = set(select_modes(dia, ThresholdFunction(fit, m1)).tolist())
    high = set(select_modes(dia, ThresholdFunction(fit, m1 + gap)).tolist())
    assert high <= low | {dia.root}


@pytest.mark.parametrize("seed", range(5))
def test_huber_resists_planted_outliers(seed):
    r = np.random.default_rng(seed)
    n = 300
    x = r.uniform(-2, 2, n)
    y = 0.5 - 0.8 * x + 0.1 * r.normal(size=n)
    bad = r.choice(n, n // 10, replace=False)
    clean = np.setdiff1d(np.arange(n), bad)
    y_dirty = y.copy()
    y_dirty[bad] += r.uniform(5, 15, len(bad))
    assert abs(fit_line(x, y_dirty).beta1 - ols(x[clean], y[clean])[1]) <= 0.05


@pytest.mark.parametrize("seed", range(3))
def test_theil_sen_agrees_with_huber(seed):
    r = np.random.default_rng(seed)
    x = r.uniform(-3, 3, 500)
    y = 1.0 + 0.4 * x + 0.2 * r.normal(size=500)
    assert abs(fit_line(x, y).beta1 - fit_line(x, y, method="theil-sen").beta1) < 0.1


def test_fit_report_keys():
    rep = fit_report(RobustFit(1.0, -0.5, 0.2, iterations=4, n_used=10), 3.0, [4, 1], n_trimmed=2)
    assert set(rep) == {"method", "beta0", "beta1", "s", "M", "iterations", "n_used", "n_trimmed", "mode_indices"}
    assert rep["mode_indices"] == [4, 1]
