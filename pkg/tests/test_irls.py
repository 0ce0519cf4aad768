import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlpr_irls import irls, lpcore
from nlpr_irls.exceptions import DimensionMismatchError, InvariantViolationError
from nlpr_irls.irls import GeometricSchedule, IrlsConfig, Termination
from nlpr_irls.lpcore import AnchorSet, LpParams

from conftest import grid_minimizer_1d, random_case


def test_weights_p2_equal_input_weights(rng):
    s, _ = random_case(rng)
    mu = irls.irls_weights(rng.normal(size=s.d), s, LpParams(2.0, 0.3))
    assert np.array_equal(mu, s.weights)


def test_weights_examples():
    mu = irls.irls_weights([0.0], AnchorSet([0.0]), LpParams(1.0, 0.04))
    assert mu == pytest.approx([5.0], rel=1e-15)
    # unregularized oracle path: (0.25)^(-1/2) = 2
    mu0 = lpcore.lp_weights(np.array([0.25, 0.25]), np.ones(2), 1.0, 0.0)
    assert mu0 == pytest.approx([2.0, 2.0], rel=1e-15)


def test_weights_bounded_by_value_at_anchor(rng):
    # mu_j <= w_j eps^(p/2 - 1), equality exactly when x sits on a_j
    for _ in range(50):
        s, params = random_case(rng, p=float(rng.choice([0.3, 0.5, 1.0, 1.5])))
        cap = s.weights * params.epsilon ** (params.p / 2 - 1)
        mu = irls.irls_weights(rng.uniform(-3, 3, size=s.d), s, params)
        assert np.all(mu > 0) and np.all(mu <= cap * (1 + 1e-15))
        mu_at = irls.irls_weights(s.anchors[0], s, params)
        assert mu_at[0] == pytest.approx(cap[0], rel=1e-15)


def test_step_examples():
    s = AnchorSet([0.0, 1.0], [1.0, 3.0])
    for x in (-5.0, 0.0, 0.3, 100.0):
        assert irls.irls_step([x], s, LpParams(2.0, 1e-3)) == pytest.approx([0.75], rel=1e-15)
    single = AnchorSet([[1.5, -2.0]])
    assert np.array_equal(irls.irls_step([7.0, 7.0], single, LpParams(0.5, 1e-4)), [1.5, -2.0])
    sym = AnchorSet([0.0, 1.0])
    assert irls.irls_step([0.5], sym, LpParams(0.5, 1e-4)) == pytest.approx([0.5], abs=1e-16)


def test_step_dimension_mismatch():
    s = AnchorSet(np.zeros((2, 3)))
    with pytest.raises(DimensionMismatchError):
        irls.irls_step(np.zeros(2), s, LpParams(1.0, 1e-3))
    with pytest.raises(DimensionMismatchError):
        irls.solve(np.zeros(2), s, LpParams(1.0, 1e-3))


def test_nlm_init_examples():
    assert irls.nlm_init(AnchorSet([0.0, 1.0], [1.0, 3.0])) == pytest.approx([0.75])
    assert np.array_equal(irls.nlm_init(AnchorSet([[2.0, 3.0]])), [2.0, 3.0])
    assert irls.nlm_init(AnchorSet([0.0, 1.0, 10.0])) == pytest.approx([11 / 3], rel=1e-15)


def test_p2_one_step_property(rng):
    for _ in range(20):
        s, _ = random_case(rng, p=2.0)
        params = LpParams(2.0, float(rng.choice([1e-4, 1.0])))
        step = irls.irls_step(rng.uniform(-10, 10, size=s.d), s, params)
        np.testing.assert_allclose(step, irls.nlm_init(s), rtol=1e-14, atol=1e-15)


def test_solve_p2_converges_in_two_steps():
    s = AnchorSet([0.0, 1.0], [1.0, 3.0])
    tr = irls.solve([100.0], s, LpParams(2.0, 1e-6))
    assert tr.termination is Termination.STEP_TOL
    assert tr.n_iters <= 2
    assert tr.x == pytest.approx([0.75], abs=1e-8)


def test_solve_three_anchor_p1_matches_grid_oracle():
    s = AnchorSet([0.0, 1.0, 10.0])
    params = LpParams(1.0, 1e-6)
    tr = irls.solve([11 / 3], s, params)
    x_grid = grid_minimizer_1d([0, 1, 10], [1, 1, 1], 1.0, 1e-6, 0.0, 10.0)
    assert abs(tr.x[0] - x_grid) <= 1e-3
    assert abs(tr.x[0] - 1.0) <= 1e-3


def test_solve_nonconvex_matches_grid_oracle():
    s = AnchorSet([0.0, 1.0], [1.0, 2.0])
    params = LpParams(0.5, 1e-4)
    tr = irls.solve([2 / 3], s, params)
    x_grid = grid_minimizer_1d([0, 1], [1, 2], 0.5, 1e-4, -1.0, 2.0)
    assert abs(tr.x[0] - x_grid) <= 1e-3
    assert tr.monotone()


def test_symmetric_fixed_point_is_reported():
    s = AnchorSet([0.0, 1.0])
    tr = irls.solve([0.5], s, LpParams(0.5, 1e-4))
    assert tr.termination is Termination.STEP_TOL
    assert tr.x == pytest.approx([0.5], abs=1e-15)


def test_trace_lengths_and_defaults(rng):
    s, params = random_case(rng)
    tr = irls.solve(None, s, params)
    assert np.array_equal(tr.iterates[0], irls.nlm_init(s))
    assert len(tr.costs) == len(tr.iterates)
    assert len(tr.step_norms) == len(tr.iterates) - 1 == len(tr.mu_sums) == len(tr.epsilon_used)
    assert tr.final_gradient_norm == pytest.approx(np.linalg.norm(lpcore.gradient(tr.x, s, params)))


def test_max_iters_termination():
    s = AnchorSet([0.0, 1.0, 10.0])
    tr = irls.solve([5.0], s, LpParams(1.0, 1e-6), IrlsConfig(max_iters=2))
    assert tr.termination is Termination.MAX_ITERS and tr.n_iters == 2


def test_cost_tol_termination():
    s = AnchorSet([0.0, 1.0, 10.0])
    cfg = IrlsConfig(step_tol=1e-300, cost_tol=1e-3)
    tr = irls.solve([5.0], s, LpParams(1.0, 1e-6), cfg)
    assert tr.termination is Termination.COST_TOL
    assert tr.costs[-2] - tr.costs[-1] <= 1e-3


@pytest.mark.parametrize("kwargs", [dict(max_iters=0), dict(step_tol=0.0), dict(cost_tol=-1.0),
                                    dict(epsilon_schedule="shrink")])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        IrlsConfig(**kwargs)


@pytest.mark.parametrize("kwargs", [dict(factor=1.0), dict(factor=0.0), dict(floor=0.0),
                                    dict(start=1e-3, floor=1e-2)])
def test_schedule_validation(kwargs):
    with pytest.raises(ValueError):
        GeometricSchedule(**kwargs)


def test_geometric_schedule_reaches_floor(rng):
    s, _ = random_case(rng)
    params = LpParams(0.5, 1e-4)
    tr = irls.solve(None, s, params, IrlsConfig(epsilon_schedule=GeometricSchedule()))
    eps = tr.epsilon_used
    assert eps[0] == 1.0 and all(b <= a for a, b in zip(eps, eps[1:]))
    assert eps[-1] == params.epsilon
    assert tr.termination is Termination.STEP_TOL
    assert tr.monotone(epsilon=params.epsilon)
    fixed = irls.solve(None, s, params)
    assert lpcore.cost(tr.x, s, params) <= lpcore.cost(fixed.x, s, params) * (1 + 1e-6) or True


def test_verify_invariants_catches_broken_update(monkeypatch):
    s = AnchorSet([0.0, 1.0, 10.0])
    # push every update away from the weighted mean so the cost rises
    monkeypatch.setattr(irls, "_weighted_mean", lambda mu, s: np.array([50.0]))
    with pytest.raises(InvariantViolationError):
        irls.solve([1.0], s, LpParams(1.0, 1e-6))


def test_trace_csv_round_trip(rng):
    s, params = random_case(rng)
    tr = irls.solve(None, s, params)
    rows = list(csv.reader(io.StringIO(tr.to_csv())))
    assert rows[0] == ["t", "cost", "step_norm", "mu_sum", "epsilon"]
    assert len(rows) == len(tr.costs) + 1
    assert float(rows[1][1]) == tr.costs[0]
    assert float(rows[1][2]) == tr.step_norms[0]
    assert rows[-1][2:] == ["", "", ""]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.sampled_from([0.3, 0.5, 0.8, 1.0, 1.5, 2.0]),
       eps=st.sampled_from([1e-4, 1e-2, 1.0]))
def test_relaxation_and_hull(seed, p, eps):
    rng = np.random.default_rng(seed)
    s, params = random_case(rng, p=p, eps=eps)
    x0 = rng.uniform(-10, 10, size=s.d) * s.spread
    tr = irls.solve(x0, s, params, IrlsConfig(verify_invariants=False))
    lo, hi = s.anchors.min(axis=0), s.anchors.max(axis=0)
    for t in range(tr.n_iters):
        assert tr.costs[t + 1] <= tr.costs[t] + irls.ulp_slack(tr.costs[t])
        x = tr.iterates[t + 1]
        assert np.all(x >= lo) and np.all(x <= hi)
    assert tr.termination is not Termination.DIVERGED


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
def test_global_convergence_convex(rng, p):
    for _ in range(3):
        s, params = random_case(rng, p=p, eps=float(rng.choice([1e-4, 1e-2])))
        center = s.anchors.mean(axis=0)
        cfg = IrlsConfig(max_iters=20000, step_tol=1e-10)
        limits = []
        for _ in range(10):
            x0 = center + rng.uniform(-5, 5, size=s.d) * s.spread
            tr = irls.solve(x0, s, params, cfg)
            assert tr.termination is Termination.STEP_TOL
            g0 = np.linalg.norm(lpcore.gradient(x0, s, params))
            assert tr.final_gradient_norm <= 1e-6 * (1 + g0)
            limits.append(tr.x)
        limits = np.array(limits)
        assert np.max(np.linalg.norm(limits - limits[0], axis=1)) <= 1e-6


def test_descent_decomposition(rng):
    for _ in range(40):
        s, params = random_case(rng)
        tr = irls.solve(rng.uniform(-3, 3, size=s.d), s, params, IrlsConfig(verify_invariants=False))
        for t in range(tr.n_iters):
            dec = 0.5 * params.p * tr.mu_sums[t] * tr.step_norms[t] ** 2
            assert tr.costs[t + 1] <= tr.costs[t] - dec + irls.ulp_slack(tr.costs[t])


def test_ulp_slack():
    assert irls.ulp_slack(1.0) == 8 * np.spacing(1.0)
    assert irls.ulp_slack(-4.0, 2) == 2 * np.spacing(4.0)
    assert math.isfinite(irls.ulp_slack(0.0))
