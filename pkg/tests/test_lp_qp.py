"""The in-house simplex and active-set QP, cross-checked against scipy and cvxpy."""
import numpy as np
import pytest
import scipy.optimize as so
from hypothesis import assume, given, settings, strategies as st

from mpec.lp import find_feasible_point, linprog
from mpec.qp import paired_rows, solve_qp

seeds = st.integers(0, 2**32 - 1)


def _random_lp(rng):
    d, k = int(rng.integers(1, 5)), int(rng.integers(1, 7))
    A = rng.normal(size=(k, d))
    b = rng.normal(size=k)
    c = rng.normal(size=d)
    return c, A, b


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_linprog_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    c, A, b = _random_lp(rng)
    ours = linprog(c, A, b)
    free = [(None, None)] * c.size
    ref = so.linprog(c, A_ub=A, b_ub=b, bounds=free, method="highs")
    # HiGHS presolve may call an unbounded LP infeasible; settle feasibility on its own
    feasible = so.linprog(np.zeros_like(c), A_ub=A, b_ub=b, bounds=free, method="highs").status == 0
    expected = "infeasible" if not feasible else {0: "optimal", 2: "unbounded", 3: "unbounded"}[ref.status]
    assert ours.status == expected
    if expected == "optimal":
        assert ours.value == pytest.approx(ref.fun, abs=1e-7)
        assert np.all(A @ ours.x <= b + 1e-8)
    elif expected == "infeasible":
        w = ours.farkas_ub
        assert np.all(w >= -1e-12)
        assert np.allclose(A.T @ w, 0, atol=1e-8)
        assert b @ w < 0
    else:
        assert np.all(A @ ours.ray <= 1e-9) and c @ ours.ray < 0


def test_linprog_equalities():
    res = linprog([1.0, 1.0], A_eq=[[1.0, -1.0]], b_eq=[1.0], A_ub=-np.eye(2), b_ub=[0.0, 0.0])
    assert res.status == "optimal" and res.value == pytest.approx(1.0)
    assert np.allclose(res.x, [1.0, 0.0])


def test_find_feasible_point_infeasible():
    res = find_feasible_point(np.array([[1.0], [-1.0]]), np.array([0.0, -1.0]))
    assert res.status == "infeasible"
    w = res.farkas_ub
    assert np.all(w >= 0) and abs(w @ [1.0, -1.0]) <= 1e-12 and w @ [0.0, -1.0] < 0


def test_degenerate_lp_terminates():
    # classic cycling example for the largest-coefficient rule
    c = np.array([-0.75, 150.0, -0.02, 6.0])
    A = np.array([[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]])
    A_ub = np.vstack([A, -np.eye(4)])
    b_ub = np.concatenate([[0.0, 0.0, 1.0], np.zeros(4)])
    res = linprog(c, A_ub, b_ub)
    assert res.status == "optimal" and res.value == pytest.approx(-0.05)


def test_paired_rows():
    E = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    pairs, rest = paired_rows(E, np.array([2.0, 1.0, -2.0]))
    assert pairs == [(0, 2)] and rest == [1]


cvxpy = pytest.importorskip("cvxpy")


@pytest.mark.filterwarnings("ignore:Solution may be inaccurate")
@settings(max_examples=100, deadline=None)
@given(seeds)
def test_qp_matches_cvxpy(seed):
    rng = np.random.default_rng(seed)
    d, k = int(rng.integers(1, 5)), int(rng.integers(1, 7))
    R = rng.normal(size=(int(rng.integers(0, d + 1)), d))
    Q = R.T @ R
    c = rng.normal(size=d)
    E = rng.normal(size=(k, d))
    e = rng.normal(size=k)
    ours = solve_qp(Q, c, E, e)
    z = cvxpy.Variable(d)
    prob = cvxpy.Problem(cvxpy.Minimize(0.5 * cvxpy.quad_form(z, cvxpy.psd_wrap(Q)) + c @ z), [E @ z <= e])
    try:
        prob.solve(solver=cvxpy.CLARABEL)
    except cvxpy.error.SolverError:
        assume(False)
    status = {"optimal": "optimal", "infeasible": "infeasible", "unbounded": "unbounded"}.get(prob.status)
    assume(status is not None)  # reference solver unsure ("optimal_inaccurate" etc.)
    assert ours.status == status
    if status == "optimal":
        assert ours.value == pytest.approx(prob.value, abs=1e-6, rel=1e-6)
        assert np.all(E @ ours.x <= e + 1e-8)
    elif status == "unbounded":
        r = ours.ray
        assert np.all(E @ r <= 1e-9)
        assert abs(r @ Q @ r) <= 1e-9 and c @ r < 0


def test_qp_equality_and_start():
    res = solve_qp(np.eye(2), np.zeros(2), np.zeros((0, 2)), np.zeros(0),
                   A_eq=np.array([[1.0, 1.0]]), b_eq=np.array([2.0]))
    assert res.status == "optimal" and np.allclose(res.x, [1.0, 1.0])
