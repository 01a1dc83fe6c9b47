
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from instances import orthant_lcp_mpec, small
from mpec import (build_fb, build_implicit, build_kkt, build_normal_map, builtin, fb_value,
                  min_norm_multipliers, natural_residual, residual_theta, solve_lcp_enumerate)
from mpec.errors import InputError, MonotonicityError, UnsupportedError
from mpec.reformulate import FB_ORIGIN_SLOPE, fb_gradient

seeds = st.integers(0, 2**32 - 1)
finite = st.floats(-1e3, 1e3, allow_nan=False)
scaled = st.one_of(st.just(0.0), st.floats(1e-3, 10), st.floats(-10, -1e-3))

LCP_1D = dict(M=[[1.0]], N=[[-1.0]], q=[0.0])


class TestKkt:
    def test_one_dimensional(self):
        kkt = build_kkt(small(**LCP_1D))
        for x, y, lam in [(0.0, 0.0, 0.0), (2.0, 3.0, 1.0), (-1.0, 0.5, 4.0)]:
            assert kkt.stationarity([x], [y], [lam]).tolist() == [y - x - lam]
        assert kkt.pairs == [(0, 0)]
        assert kkt.slack([5.0], [2.0]).tolist() == [2.0]

    def test_no_constraints(self):
        p = small([[2.0]], B=np.zeros((0, 1)), q=[-2.0])
        kkt = build_kkt(p)
        assert kkt.pairs == []
        assert kkt.is_feasible([], [1.0], [])
        assert not kkt.is_feasible([], [0.0], [])

    @pytest.mark.parametrize("k", [1, 2, 7, 50])
    def test_q1_multiplier_sequence(self, k):
        with pytest.warns(UserWarning):
            kkt = build_kkt(builtin("q1"))
        x, y, lam = [-1.0 / k], [0.0], [float(k), 0.0, 0.0]
        assert abs(kkt.stationarity(x, y, lam)[0]) <= 1e-12
        assert kkt.is_feasible(x, y, lam)

    def test_shape_checks(self):
        kkt = build_kkt(small(**LCP_1D))
        with pytest.raises(InputError):
            kkt.stationarity([0.0], [0.0], [0.0, 1.0])


class TestFb:
    @pytest.mark.parametrize("a,b,expected", [
        (0.0, 0.0, 0.0), (3.0, 0.0, 0.0), (1.0, 1.0, np.sqrt(2) - 2), (-1.0, 0.0, 2.0)])
    def test_values(self, a, b, expected):
        assert fb_value(a, b) == pytest.approx(expected, abs=1e-15)

    def test_origin_derivative(self):
        da, db = fb_gradient(0.0, 0.0)
        assert da == db == FB_ORIGIN_SLOPE == pytest.approx(np.sqrt(2) / 2 - 1)

    def test_residual_examples(self):
        fb = build_fb(build_kkt(small(**LCP_1D)))
        assert np.linalg.norm(fb.residual([2.0], [2.0], [0.0])) == 0.0
        assert np.linalg.norm(fb.residual([0.0], [1.0], [0.0])) == pytest.approx(1.0)

    def test_jacobian_matches_finite_differences_off_kinks(self):
        rng = np.random.default_rng(0)
        p = orthant_lcp_mpec(rng, 2, 3)
        fb = build_fb(build_kkt(p))
        x, y, lam = rng.normal(size=2), rng.normal(size=3), rng.normal(size=3)
        J = fb.jacobian(x, y, lam)
        w = np.concatenate([y, lam])
        h = 1e-7
        for j in range(6):
            e = np.zeros(6)
            e[j] = h
            plus = fb.residual(x, (w + e)[:3], (w + e)[3:])
            minus = fb.residual(x, (w - e)[:3], (w - e)[3:])
            assert np.allclose(J[:, j], (plus - minus) / (2 * h), atol=1e-6)


@settings(max_examples=200, deadline=None)
@given(finite, finite)
def test_fb_symmetry(a, b):
    assert fb_value(a, b) == fb_value(b, a)


@settings(max_examples=200, deadline=None)
@given(scaled, scaled)
def test_fb_zero_iff_complementary(a, b):
    # entries are 0 or at least 1e-3 in size, so no underflow blurs the zero set
    comp = a >= 0 and b >= 0 and a * b == 0
    assert (abs(fb_value(a, b)) <= 1e-9) == comp


class TestNormalMap:
    def test_examples(self):
        nm = build_normal_map(small([[1.0]], N=[[0.0]], q=[-1.0]))
        assert nm.value([0.0], [1.0]).tolist() == [0.0]
        assert nm.recover([1.0]).tolist() == [1.0]
        nm = build_normal_map(small([[1.0]], N=[[0.0]], q=[1.0]))
        assert nm.value([0.0], [-2.0]).tolist() == [-1.0]

    def test_nonnegative_z_gives_F(self):
        rng = np.random.default_rng(1)
        p = orthant_lcp_mpec(rng, 2, 3)
        nm = build_normal_map(p)
        x, z = rng.normal(size=2), np.abs(rng.normal(size=3))
        assert np.allclose(nm.value(x, z), p.F(x, z))

    def test_non_orthant_rejected(self):
        with pytest.raises(UnsupportedError):
            build_normal_map(small([[1.0]], B=[[1.0]], b=[-1.0]))
        with pytest.raises(UnsupportedError):
            build_normal_map(builtin("q3"))

    def test_solve(self):
        nm = build_normal_map(small(np.eye(2), q=[-1.0, 1.0]))
        res = nm.solve([])
        assert res.status == "unique" and np.allclose(res.solutions[0], [1.0, 0.0])


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_normal_map_equivalence(seed):
    rng = np.random.default_rng(seed)
    p = orthant_lcp_mpec(rng, 2, int(rng.integers(1, 5)), M=None)
    nm = build_normal_map(p)
    x = rng.uniform(-1, 1, 2)
    for y in solve_lcp_enumerate(p.M, p.q + p.N @ x).solutions:
        z = y - p.F(x, y)
        assert np.linalg.norm(nm.value(x, z)) <= 1e-8
        assert np.array_equal(nm.recover(z), np.maximum(z, 0))
        assert np.allclose(nm.recover(z), y, atol=1e-8)
    z = 3 * rng.normal(size=p.m)
    zp, zm = np.maximum(z, 0), np.maximum(-z, 0)
    assert np.array_equal(zp - zm, z) and not np.any(zp * zm)


class TestResiduals:
    def test_natural_residual(self):
        assert natural_residual([1, 3], [2, 1]).tolist() == [1, 1]
        v = np.array([0.3, -2.0])
        assert np.array_equal(natural_residual(v, v), v)
        assert natural_residual([0, 5], [5, 0]).tolist() == [0, 0]
        with pytest.raises(InputError):
            natural_residual([1, 2], [1])

    def test_theta_examples(self):
        p = small(**LCP_1D)
        assert residual_theta(p, [0.0], [1.0]) == 0.5
        assert residual_theta(p, [2.0], [2.0]) == 0.0
        q = small(np.eye(2), q=[1.0, 2.0])
        assert residual_theta(q, [], [0.0, 0.0]) == 0.0

    def test_theta_needs_orthant(self):
        with pytest.raises(UnsupportedError):
            residual_theta(small([[1.0]], B=[[1.0]]), [], [0.0])


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_theta_nonnegative(seed):
    rng = np.random.default_rng(seed)
    p = orthant_lcp_mpec(rng, 2, 3)
    assert residual_theta(p, 5 * rng.normal(size=2), 5 * rng.normal(size=3)) >= 0


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_kkt_fb_consistency(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    p = orthant_lcp_mpec(rng, 1, m)
    kkt = build_kkt(p)
    fb = build_fb(kkt)
    x = rng.uniform(-1, 1, 1)
    y = solve_lcp_enumerate(p.M, p.q + p.N @ x).solutions[0]
    lam = p.F(x, y)  # B = -I, so stationarity F - lam = 0
    candidates = [(y, lam), (y + 0.1 * rng.normal(size=m), lam), (y, lam + 0.1)]
    for yy, ll in candidates:
        feasible = kkt.is_feasible(x, yy, ll)
        small_res = np.linalg.norm(fb.residual(x, yy, ll)) <= 1e-8
        assert feasible == small_res


class TestImplicit:
    def test_max_response(self):
        ip = build_implicit(small(**LCP_1D))
        assert ip.response([0.5]) == pytest.approx([0.5], abs=1e-9)
        assert ip.response([-0.5]) == pytest.approx([0.0], abs=1e-9)

    def test_shifted(self):
        ip = build_implicit(small([[1.0]], N=[[-1.0]], q=[1.0]))
        assert ip.response([2.0]) == pytest.approx([1.0], abs=1e-9)

    def test_skew_rejected(self):
        with pytest.raises(MonotonicityError, match="positive definite"):
            build_implicit(small([[0.0, 1.0], [-1.0, 0.0]]))

    def test_x_dependent_set_rejected(self):
        with pytest.raises(UnsupportedError):
            build_implicit(small([[1.0]], N=[[0.0]], A=[[1.0]], B=[[-1.0]]))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_implicit_response_is_kkt_feasible(seed):
    rng = np.random.default_rng(seed)
    p = orthant_lcp_mpec(rng, 2, int(rng.integers(1, 4)), M=None)
    ip = build_implicit(p)
    x = rng.uniform(-1, 1, 2)
    y = ip.response(x)
    lam = min_norm_multipliers(p, x, y)
    assert lam is not None
    assert build_kkt(p).is_feasible(x, y, lam)
