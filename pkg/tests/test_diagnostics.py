import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from instances import orthant_lcp_mpec, pd_matrix, small
from mpec import (GeneralMpec, Polyhedron, build_kkt, builtin, check_cq, classify_matrix,
                  min_norm_multipliers, probe_sbcq, solve_lcp_enumerate, stackelberg_values)
from mpec.errors import InputError, PreconditionError

seeds = st.integers(0, 2**32 - 1)


class TestClassify:
    def test_identity(self):
        v = classify_matrix(np.eye(3))
        assert v.kind == "strongly-monotone" and v.modulus == pytest.approx(1.0)
        assert v.spectral_norm == pytest.approx(1.0)

    def test_skew(self):
        v = classify_matrix([[0.0, 1.0], [-1.0, 0.0]])
        assert v.kind == "monotone" and v.modulus == pytest.approx(0.0, abs=1e-15)

    def test_indefinite(self):
        assert classify_matrix(np.diag([1.0, -1.0])).kind == "not-monotone"

    def test_non_square(self):
        with pytest.raises(InputError):
            classify_matrix(np.zeros((2, 3)))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_strong_monotonicity_iff_unique(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 5))
    if rng.random() < 0.5:
        M = pd_matrix(rng, m)
    else:
        S = rng.normal(size=(m, m))
        M = 0.5 * (S + S.T) - (abs(np.linalg.eigvalsh(0.5 * (S + S.T))[0]) + 0.5) * np.eye(m)
    unique = all(solve_lcp_enumerate(M, rng.normal(size=m) * 3).status == "unique" for _ in range(50))
    assert classify_matrix(M).strongly_monotone == unique


def linear_problem(G, h):
    """GeneralMpec with g(x, y) = G y - h, F = 0, no upper variable."""
    G, h = np.asarray(G, float), np.asarray(h, float)
    return GeneralMpec(n=0, m=G.shape[1], l=G.shape[0], f=lambda x, y: 0.0,
                       F=lambda x, y: np.zeros(G.shape[1]), g=lambda x, y: G @ y - h,
                       grad_y_g=lambda x, y: G, Z=Polyhedron.whole_space(G.shape[1]), name="linear")


class TestCheckCq:
    def test_q3(self):
        rep = check_cq(builtin("q3"), [0.0, 0.0], [0.0, 0.0])
        assert (rep.licq, rep.licq_rank, rep.mfcq) == (False, 1, True)
        assert rep.mfcq_direction.tolist() == [-1.0, 0.0]
        assert rep.crcq == "fails"
        assert all(w.center_rank == 1 and w.rank == 2 for w in rep.crcq_witnesses)

    def test_independent_linear(self):
        rep = check_cq(linear_problem(np.eye(2), [0.0, 0.0]), [], [0.0, 0.0])
        assert rep.licq and rep.mfcq and rep.crcq == "sampled-holds"

    def test_single_constraint(self):
        rep = check_cq(small([[1.0]]), [], [0.0])
        assert rep.active == [0] and rep.licq and rep.licq_rank == 1
        assert rep.crcq == "holds"

    def test_mfcq_fails_for_opposite_gradients(self):
        rep = check_cq(linear_problem([[1.0], [-1.0]], [0.0, 0.0]), [], [0.0])
        assert not rep.licq and not rep.mfcq

    def test_no_active(self):
        rep = check_cq(small([[1.0]]), [], [1.0])
        assert rep.active == [] and rep.licq and rep.mfcq and rep.crcq == "holds"

    def test_infeasible_point(self):
        with pytest.raises(PreconditionError):
            check_cq(small([[1.0]]), [], [-1.0])

    def test_seeded(self):
        a = check_cq(builtin("q3"), [0.0, 0.0], [0.0, 0.0], seed=3)
        b = check_cq(builtin("q3"), [0.0, 0.0], [0.0, 0.0], seed=3)
        assert [w.point.tolist() for w in a.crcq_witnesses] == [w.point.tolist() for w in b.crcq_witnesses]


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_licq_implies_mfcq_and_certificate_valid(seed):
    rng = np.random.default_rng(seed)
    m, k = int(rng.integers(1, 4)), int(rng.integers(1, 5))
    G = rng.normal(size=(k, m))
    if rng.random() < 0.3 and k > 1:
        G[-1] = -G[0] * rng.uniform(0.5, 2)  # makes MFCQ fail sometimes
    if rng.random() < 0.3 and k > 1:
        G[1] = G[0] * 2  # rank deficiency
    y = rng.normal(size=m)
    active = rng.random(k) < 0.7
    h = G @ y + np.where(active, 0.0, rng.uniform(0.1, 1, k))
    rep = check_cq(linear_problem(G, h), [], y)
    if rep.licq:
        assert rep.mfcq
    if rep.mfcq and rep.active:
        assert np.all(G[rep.active] @ rep.mfcq_direction <= -1e-9)


class TestMinNorm:
    def test_q1(self):
        lam = min_norm_multipliers(builtin("q1"), [-0.1], [0.0])
        assert lam[0] == pytest.approx(10.0, rel=1e-12) and lam[1:].tolist() == [0.0, 0.0]
        assert min_norm_multipliers(builtin("q1"), [0.0], [0.0]) is None

    def test_interior(self):
        p = small([[1.0]], q=[-1.0])
        assert min_norm_multipliers(p, [], [1.0]).tolist() == [0.0]

    def test_wrong_point(self):
        assert min_norm_multipliers(small([[1.0]], q=[-1.0]), [], [2.0]) is None


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_min_norm_passes_kkt_test(seed):
    rng = np.random.default_rng(seed)
    p = orthant_lcp_mpec(rng, 2, int(rng.integers(1, 4)))
    x = rng.uniform(-1, 1, 2)
    y = solve_lcp_enumerate(p.M, p.q + p.N @ x).solutions[0]
    lam = min_norm_multipliers(p, x, y)
    assert lam is not None and build_kkt(p).is_feasible(x, y, lam)


class TestProbeSbcq:
    def test_q1_sequence(self):
        seq = [([-1.0 / k], [0.0]) for k in range(1, 51)]
        res = probe_sbcq(builtin("q1"), seq)
        assert res.verdict == "diverging"
        assert np.allclose(res.norms, np.arange(1, 51), rtol=1e-8, atol=0)
        assert res.growth_exponent == pytest.approx(1.0, abs=0.05)

    def test_constant_sequence(self):
        p = small([[1.0]], q=[-1.0])
        res = probe_sbcq(p, [([], [1.0])] * 10)
        assert res.verdict == "bounded" and res.growth_exponent is None

    def test_uniform_mfcq_sequence_bounded(self):
        # q1 for x > 0: the active constraint is v >= -1 with gradient -1 throughout
        seq = [([1.0 / k], [-1.0]) for k in range(1, 30)]
        res = probe_sbcq(builtin("q1"), seq)
        assert res.verdict == "bounded" and np.allclose(res.norms, 1.0)

    def test_non_response_rejected(self):
        # y = 0 is feasible at x = 0 but S(0) = {-1}
        seq = [([-1.0 / k], [0.0]) for k in range(1, 10)] + [([0.0], [0.0])]
        with pytest.raises(PreconditionError, match="9"):
            probe_sbcq(builtin("q1"), seq)

    def test_no_multiplier(self):
        trusted = dataclasses.replace(builtin("q1"), reaction=None)
        seq = [([-1.0 / k], [0.0]) for k in range(1, 10)] + [([0.0], [0.0])]
        with pytest.warns(UserWarning):
            res = probe_sbcq(trusted, seq)
        assert res.verdict == "no-multiplier" and res.norms[-1] is None

    def test_short(self):
        with pytest.raises(InputError):
            probe_sbcq(builtin("q1"), [([-1.0], [0.0])] * 7)

    def test_infeasible_member_named(self):
        seq = [([-1.0 / k], [0.0]) for k in range(1, 10)]
        seq[4] = ([0.5], [2.0])
        with pytest.raises(PreconditionError, match="4"):
            probe_sbcq(builtin("q1"), seq)

    def test_trusted_without_oracle_warns(self):
        with pytest.warns(UserWarning, match="trusted"):
            probe_sbcq(builtin("q3"), [([0.0, 0.0], [0.0, 0.0])] * 8)

    def test_slow_growth_is_bounded(self):
        # norms 1 + log(k)/100 increase but neither grow 1e3-fold nor like a power
        seq = [([-1.0 / (1 + np.log(k) / 100)], [0.0]) for k in range(1, 21)]
        res = probe_sbcq(builtin("q1"), seq)
        assert res.verdict == "bounded"


class TestStackelberg:
    def test_q1_singleton(self):
        q1 = builtin("q1")
        assert stackelberg_values(q1.f, [np.array([-1.0])], [0.0]) == (-1.0, -1.0)

    def test_pair(self):
        q1 = builtin("q1")
        assert stackelberg_values(q1.f, [[-1.0], [0.0]], [0.0]) == (-1.0, 0.0)

    def test_empty(self):
        with pytest.raises(InputError):
            stackelberg_values(lambda x, y: 0.0, [], [0.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=8))
def test_optimistic_at_most_pessimistic(values):
    opt, pess = stackelberg_values(lambda x, y: float(y[0]), [[v] for v in values], [0.0])
    assert opt <= pess and opt == min(values) and pess == max(values)
