import numpy as np
import pytest
from conftest import UNIT
from hypothesis import given
from hypothesis import strategies as st

from segnn.errors import InvalidInputError
from segnn.geometry import PointSet, Rectangle
from segnn.second_order import (
    csr_generator,
    diggle_d,
    edge_weights,
    envelope,
    make_grid,
    pair_correlation,
    ripley_k_biv,
    ripley_k_uni,
    rl_generator,
)


def circle_fraction_numeric(c, d, region, m=200_000):
    ang = (np.arange(m) + 0.5) * 2 * np.pi / m
    x, y = c[0] + d * np.cos(ang), c[1] + d * np.sin(ang)
    inside = (x >= region.xmin) & (x <= region.xmax) & (y >= region.ymin) & (y <= region.ymax)
    return inside.mean()


def csr(n, seed, q=2):
    r = np.random.default_rng(seed)
    return PointSet(r.uniform(size=(n, 2)), np.r_[np.arange(q), r.integers(0, q, n - q)], UNIT)


def test_edge_weight_examples():
    assert edge_weights([[0.5, 0.5]], [0.3], UNIT)[0] == 1.0
    assert edge_weights([[0.0, 0.0]], [0.5], UNIT)[0] == pytest.approx(4.0)
    assert edge_weights([[0.0, 0.3]], [0.2], UNIT)[0] == pytest.approx(2.0)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.001, 0.5))
def test_edge_weights_match_numeric_circle(x, y, d):
    w = edge_weights([[x, y]], [d], UNIT)[0]
    assert 1.0 <= w <= 4.0 + 1e-12
    assert 1 / w == pytest.approx(circle_fraction_numeric((x, y), d, UNIT), abs=1e-4)


def test_grid_validation():
    with pytest.raises(InvalidInputError):
        make_grid([0.1, 0.6], UNIT)
    with pytest.raises(InvalidInputError):
        make_grid([0.2, 0.1], UNIT)
    with pytest.raises(InvalidInputError):
        make_grid([0.0, 0.1], UNIT)
    assert make_grid([0.1, 1.0], Rectangle(0, 0, 3, 2)).tolist() == [0.1, 1.0]


def test_k_trivial_cases():
    big = Rectangle(-100, -100, 100, 100)
    ps = PointSet(np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([0, 0]), big)
    assert np.all(ripley_k_uni(ps, np.linspace(0.1, 1.99, 20)).values == 0)
    ps = PointSet(np.array([[0.1, 0.1], [0.15, 0.1], [0.9, 0.9], [0.85, 0.9]]), np.array([0, 0, 1, 1]), UNIT)
    assert np.all(ripley_k_biv(ps, 0, 1, [0.1, 0.3, 0.5]).values == 0)
    with pytest.raises(InvalidInputError):
        ripley_k_uni(PointSet(np.array([[0.2, 0.2], [0.4, 0.4]]), np.array([0, 1]), UNIT), [0.1], cls=0)


def test_k_properties(csr200):
    t = np.linspace(0.01, 0.5, 50)
    k = ripley_k_uni(csr200, t)
    assert np.all(k.values >= 0) and np.all(np.diff(k.values) >= 0)
    assert np.allclose(k.info["L"], np.sqrt(k.values / np.pi))


def test_cross_k_asymmetric_but_close(csr200):
    t = np.linspace(0.02, 0.25, 12)
    l12 = ripley_k_biv(csr200, 0, 1, t).info["L"]
    l21 = ripley_k_biv(csr200, 1, 0, t).info["L"]
    assert np.any(l12 != l21)
    assert np.max(np.abs(l12 - l21)) < 0.01


def test_superposition_identity(csr200):
    t = np.linspace(0.02, 0.3, 15)
    n0, n1 = csr200.class_sizes
    n = n0 + n1
    mix = (n0**2 * ripley_k_uni(csr200, t, 0).values + n1**2 * ripley_k_uni(csr200, t, 1).values
           + n0 * n1 * (ripley_k_biv(csr200, 0, 1, t).values + ripley_k_biv(csr200, 1, 0, t).values)) / n**2
    assert np.allclose(ripley_k_uni(csr200, t).values, mix, rtol=1e-9, atol=0)


@given(st.integers(0, 1000), st.integers(-8, 8), st.integers(-8, 8))
def test_translation_invariance(seed, dx, dy):
    r = np.random.default_rng(seed)
    xy = r.integers(0, 1025, size=(60, 2)) / 1024.0  # dyadic: shifts are exact
    labels = np.r_[0, 1, r.integers(0, 2, 58)]
    ps = PointSet(xy, labels, UNIT)
    moved = PointSet(xy + [dx, dy], labels, Rectangle(dx, dy, dx + 1.0, dy + 1.0))
    t = np.linspace(0.05, 0.4, 8)
    for f in (lambda p: ripley_k_uni(p, t).values, lambda p: ripley_k_biv(p, 0, 1, t).values,
              lambda p: pair_correlation(p, t[1:-1], 0.05).values):
        assert np.allclose(f(ps), f(moved), rtol=1e-12, atol=1e-12)


def test_csr_l_function_close_to_t():
    t = np.linspace(0.02, 0.2, 10)
    ok = 0
    for seed in range(30):
        l = ripley_k_uni(csr(200, seed), t).info["L"]
        ok += np.all(np.abs(l - t) <= 0.03)
    assert ok >= 27


def test_pair_correlation_basics():
    ps = csr(300, 1)
    g = pair_correlation(ps, np.linspace(0.05, 0.3, 10))
    assert g.info["bandwidth"] == pytest.approx(0.15 / np.sqrt(300))
    assert np.all(g.values >= 0) and abs(g.values.mean() - 1) < 0.15
    with pytest.raises(InvalidInputError):
        pair_correlation(ps, [0.1], bandwidth=0.0)
    with pytest.raises(InvalidInputError):
        pair_correlation(ps, [0.005, 0.1])
    with pytest.raises(InvalidInputError):
        pair_correlation(ps, [0.1, 0.495])
    g = pair_correlation(ps, [0.01, 0.2], bandwidth=0.008)
    assert g.info["unreliable"].tolist() == [True, False]


def test_pair_correlation_hard_core():
    r = np.random.default_rng(2)
    base = np.array([(x, y) for x in np.arange(0.05, 1, 0.1) for y in np.arange(0.05, 1, 0.1)])
    xy = base + r.uniform(-0.01, 0.01, base.shape)  # min distance > 0.08
    ps = PointSet(xy, np.zeros(len(xy), int), UNIT)
    g = pair_correlation(ps, [0.03, 0.05], bandwidth=0.02)
    assert np.all(g.values < 1) and np.all(g.values == 0)


def test_pair_correlation_thinning_invariance():
    ps = csr(600, 3)
    keep = np.random.default_rng(4).uniform(size=600) < 0.5
    thin = PointSet(ps.coords[keep], np.zeros(keep.sum(), int), UNIT)
    g = pair_correlation(thin, np.linspace(0.06, 0.3, 9)).values
    assert abs(g.mean() - 1) < 0.1


def test_pair_correlation_quadrature():
    ps = csr(300, 5)
    h = 0.02
    t = np.linspace(h, 0.45 - h, 2000)
    g = pair_correlation(ps, t, bandwidth=h).values
    integral = np.trapezoid(g * 2 * np.pi * t, t)
    k = ripley_k_uni(ps, [t[0], t[-1]]).values
    assert integral == pytest.approx(k[1] - k[0], rel=0.02)


def test_diggle_d():
    r = np.random.default_rng(6)
    xy = r.uniform(size=(40, 2))
    ps = PointSet(np.vstack([xy, xy]), np.r_[np.zeros(40, int), np.ones(40, int)], UNIT)
    t = np.linspace(0.02, 0.3, 10)
    d = diggle_d(ps, 0, 1, t, nsim=39, seed=1)
    assert np.all(d.values == 0)
    assert np.all(d.lower <= d.upper)
    ps = csr(120, 7)
    d = diggle_d(ps, 0, 1, t, nsim=200, seed=2)
    assert np.all(np.abs(d.info["relabel_mean"]) <= 3 * d.info["se"] / np.sqrt(200) + 1e-15)
    with pytest.warns(UserWarning):
        diggle_d(ps, 0, 1, t, nsim=5)


def test_envelope_contract(csr200):
    t = np.linspace(0.02, 0.2, 6)

    def est(p):
        return ripley_k_uni(p, t).info["L"] - t

    lo, hi, curves = envelope(csr_generator(csr200), est, 19, band=1.0, seed=3)
    assert np.array_equal(lo, curves.min(axis=0)) and np.array_equal(hi, curves.max(axis=0))
    _, _, longer = envelope(csr_generator(csr200), est, 38, band=1.0, seed=3)
    assert np.array_equal(longer[:19], curves)
    lo, hi, _ = envelope(rl_generator(csr200), lambda p: ripley_k_biv(p, 0, 1, t).values, 39, 0.95, seed=1)
    assert np.all(lo <= hi)
    with pytest.raises(InvalidInputError):
        envelope(csr_generator(csr200), est, 0)
