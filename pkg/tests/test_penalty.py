import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convexreg.penalty import ElasticNet, L1, LpPower, Quadratic


def golden_section_prox(t, lam, p, tol=1e-12):
    """Brute-force scalar argmin of 0.5*(x-t)^2 + lam*|x|^p.

    The objective is evaluated in extended precision: float64 comparisons
    near the (locally quadratic) minimum only resolve the argmin to about
    sqrt(eps) ~ 1e-7, while the tests need 1e-8.
    """
    t = np.longdouble(t)
    lam = np.longdouble(lam)
    p = np.longdouble(p)
    f = lambda x: 0.5 * (x - t) ** 2 + lam * abs(x) ** p
    lo, hi = (np.longdouble(0.0), t) if t >= 0 else (t, np.longdouble(0.0))
    invphi = (np.sqrt(np.longdouble(5.0)) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    while abs(b - a) > tol:
        if f(c) < f(d):
            b, d = d, c
            c = b - invphi * (b - a)
        else:
            a, c = c, d
            d = a + invphi * (b - a)
    return float(0.5 * (a + b))


class TestValues:
    def test_lp_power_zero(self):
        assert LpPower(1.2).value(np.zeros(4)) == 0.0

    def test_l1_hand_value(self):
        assert L1().value(np.array([1.0, -2.0, 0.0])) == 3.0

    def test_elastic_net_hand_value(self):
        assert np.isclose(ElasticNet(1e-3).value(np.array([2.0])), 2.002)

    def test_quadratic(self):
        assert np.isclose(Quadratic(2.0).value(np.array([1.0, 2.0])), 5.0)

    def test_nonnegative_and_zero_at_zero(self):
        for R in (LpPower(1.5), L1(), ElasticNet(0.5), Quadratic()):
            assert R.value(np.zeros(3)) == 0.0
            assert R.value(np.random.default_rng(0).standard_normal(3)) >= 0.0


class TestSubgradients:
    def test_lp_power_at_one(self):
        assert np.allclose(LpPower(1.2).subgradient(np.array([1.0])), [1.2])

    def test_lp_power_p2(self):
        assert np.allclose(LpPower(2.0).subgradient(np.array([3.0])), [6.0])

    def test_elastic_net(self):
        assert np.allclose(ElasticNet(0.001).subgradient(np.array([1.0])),
                           [1.001])

    def test_l1_selection_at_zero(self):
        assert np.allclose(L1().subgradient(np.array([0.0, -2.0])), [0.0, -1.0])

    def test_directional_derivative_consistency(self):
        R = LpPower(1.3)
        rng = np.random.default_rng(11)
        x = rng.standard_normal(6) + np.sign(rng.standard_normal(6)) * 0.5
        d = rng.standard_normal(6)
        eps = 1e-6
        fd = (R.value(x + eps * d) - R.value(x - eps * d)) / (2 * eps)
        assert abs(fd - np.dot(R.subgradient(x), d)) <= 1e-7 * (1 + abs(fd))


class TestProx:
    def test_lambda_zero_is_identity(self):
        t = np.array([1.0, -2.0, 0.3])
        for R in (LpPower(1.2), L1(), ElasticNet(0.5), Quadratic()):
            assert np.array_equal(R.prox(t, 0.0), t)

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError):
            L1().prox(np.array([1.0]), -0.1)

    def test_l1_soft_threshold(self):
        assert np.allclose(L1().prox(np.array([2.0]), 0.5), [1.5])
        assert np.allclose(L1().prox(np.array([-0.3]), 0.5), [0.0])

    def test_elastic_net_closed_form(self):
        out = ElasticNet(2.0).prox(np.array([3.0]), 0.5)
        assert np.allclose(out, (3.0 - 0.5) / (1.0 + 0.5 * 2.0))

    def test_quadratic_closed_form(self):
        assert np.allclose(Quadratic(1.0).prox(np.array([2.0]), 1.0), [1.0])

    def test_lp_power_against_golden_section(self):
        out = LpPower(1.2).prox(np.array([1.0]), 0.1)
        oracle = golden_section_prox(1.0, 0.1, 1.2)
        assert abs(out[0] - oracle) <= 1e-8

    def test_lp_power_optimality_inclusion(self):
        p = 1.5
        R = LpPower(p)
        t = np.array([3.0, -0.7, 1e-3, 0.0, 42.0])
        lam = 0.37
        x = R.prox(t, lam)
        resid = x + lam * p * np.sign(x) * np.abs(x) ** (p - 1.0) - t
        assert np.max(np.abs(resid)) <= 1e-9 * max(1.0, np.max(np.abs(t)))

    def test_p_range_enforced(self):
        with pytest.raises(ValueError):
            LpPower(1.0)
        with pytest.raises(ValueError):
            LpPower(2.5)


class TestSubgradientDistance:
    def test_smooth_kind_is_norm_difference(self):
        R = LpPower(1.2)
        x = np.array([1.0, -2.0])
        v = R.subgradient(x) + np.array([0.3, -0.4])
        assert np.isclose(R.subgradient_distance(x, v), 0.5)

    def test_l1_interval_distance(self):
        R = L1()
        x = np.array([0.0, 1.0])
        assert R.subgradient_distance(x, np.array([0.7, 1.0])) == 0.0
        assert np.isclose(R.subgradient_distance(x, np.array([1.5, 1.0])), 0.5)
        assert np.isclose(R.subgradient_distance(x, np.array([0.0, 0.0])), 1.0)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(-50, 50), st.floats(-50, 50),
    st.floats(0, 5),
    st.sampled_from([1.2, 1.5, 2.0]),
)
def test_prox_nonexpansive(a, b, lam, p):
    for R in (LpPower(p), L1(), ElasticNet(0.3), Quadratic()):
        pa = R.prox(np.array([a]), lam)[0]
        pb = R.prox(np.array([b]), lam)[0]
        assert abs(pa - pb) <= abs(a - b) + 1e-10


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 10))
def test_prox_of_zero_is_zero(lam):
    for R in (LpPower(1.2), L1(), ElasticNet(0.5), Quadratic()):
        assert R.prox(np.array([0.0]), lam)[0] == 0.0


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    st.floats(0, 1),
)
def test_convexity(xs, zs, lam):
    x, z = np.array(xs), np.array(zs)
    for R in (LpPower(1.2), L1(), ElasticNet(0.5), Quadratic()):
        lhs = R.value(lam * x + (1 - lam) * z)
        rhs = lam * R.value(x) + (1 - lam) * R.value(z)
        assert lhs <= rhs + 1e-10 * (1 + abs(rhs))
