"""Iteratively reweighted least squares for the smoothed lp Fermat-Weber cost.

Each step replaces the current point by the mean of the anchors under the
weights ``mu_j = w_j (||x - a_j||^2 + eps)^(p/2 - 1)``. The step is the exact
minimizer of a quadratic upper bound of the cost (see :mod:`.surrogate`), so
with a fixed ``eps`` the cost never increases and every iterate after the
first lies in the convex hull of the anchors.
"""

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import lpcore
from .exceptions import InvariantViolationError
from .lpcore import AnchorSet, LpParams

__all__ = [
    "Termination",
    "GeometricSchedule",
    "IrlsConfig",
    "SolverTrace",
    "irls_weights",
    "irls_step",
    "nlm_init",
    "solve",
    "ulp_slack",
]

ULP_SLACK = 8


def ulp_slack(value: float, ulps: int = ULP_SLACK) -> float:
    return ulps * float(np.spacing(abs(value)))


class Termination(str, enum.Enum):
    STEP_TOL = "step_tol"
    COST_TOL = "cost_tol"
    MAX_ITERS = "max_iters"
    DIVERGED = "diverged"
    SINGULAR_HESSIAN = "singular_hessian"


@dataclass(frozen=True)
class GeometricSchedule:
    """Shrink eps as ``max(floor, start * factor**t)``.

    ``floor=None`` means the epsilon of the solve's :class:`LpParams`.
    Cost guarantees only apply once eps has reached the floor.
    """

    start: float = 1.0
    factor: float = 0.5
    floor: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.factor < 1.0):
            raise ValueError("factor must lie in (0, 1)")
        if self.floor is not None:
            if not self.floor > 0:
                raise ValueError("floor must be > 0")
            if self.start < self.floor:
                raise ValueError("start must be >= floor")

    def epsilon_at(self, t: int, floor: float) -> float:
        floor = self.floor if self.floor is not None else floor
        return max(floor, self.start * self.factor ** t)


@dataclass(frozen=True)
class IrlsConfig:
    """Stopping rules and options for :func:`solve`.

    ``step_tol=None`` resolves to ``1e-8 * spread`` of the anchor set.
    ``cost_tol=None`` disables the cost-decrease test.
    """

    max_iters: int = 500
    step_tol: Optional[float] = None
    cost_tol: Optional[float] = None
    epsilon_schedule: Union[str, GeometricSchedule] = "fixed"
    verify_invariants: bool = True

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be >= 1")
        if self.step_tol is not None and not self.step_tol > 0:
            raise ValueError("step_tol must be > 0")
        if self.cost_tol is not None and not self.cost_tol >= 0:
            raise ValueError("cost_tol must be >= 0")
        if not (self.epsilon_schedule == "fixed"
                or isinstance(self.epsilon_schedule, GeometricSchedule)):
            raise ValueError("epsilon_schedule must be 'fixed' or a GeometricSchedule")


@dataclass
class SolverTrace:
    """Per-iteration record of a solve.

    ``costs[t]`` is the cost of ``iterates[t]`` under the configured epsilon.
    ``step_norms``, ``mu_sums`` and ``epsilon_used`` are indexed by step
    ``t -> t+1``; ``mu_sums`` is empty for solvers without IRLS weights.
    """

    iterates: list
    costs: list
    step_norms: list
    termination: Termination
    epsilon_used: list = field(default_factory=list)
    mu_sums: list = field(default_factory=list)
    final_gradient_norm: float = math.nan
    solver: str = "irls"

    @property
    def x(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def n_iters(self) -> int:
        return len(self.step_norms)

    @property
    def final_cost(self) -> float:
        return self.costs[-1]

    def monotone(self, ulps: int = ULP_SLACK, epsilon: Optional[float] = None) -> bool:
        """True if no step raised the cost by more than ``ulps`` ulps.

        With ``epsilon`` given, only steps taken at that epsilon are checked.
        """
        for t in range(self.n_iters):
            if epsilon is not None and self.epsilon_used and self.epsilon_used[t] != epsilon:
                continue
            if self.costs[t + 1] > self.costs[t] + ulp_slack(self.costs[t], ulps):
                return False
        return True

    def to_csv(self, fh=None) -> str:
        """Write columns ``t, cost, step_norm, mu_sum, epsilon``.

        Step quantities are blank on the last row.
        """
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "cost", "step_norm", "mu_sum", "epsilon"])
        for t, c in enumerate(self.costs):
            row = [t, repr(float(c))]
            row.append(repr(float(self.step_norms[t])) if t < len(self.step_norms) else "")
            row.append(repr(float(self.mu_sums[t])) if t < len(self.mu_sums) else "")
            row.append(repr(float(self.epsilon_used[t])) if t < len(self.epsilon_used) else "")
            writer.writerow(row)
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def irls_weights(x, s: AnchorSet, params: LpParams) -> np.ndarray:
    _, _, r2 = lpcore._sq_dists(x, s)
    return lpcore.lp_weights(r2, s.weights, params.p, params.epsilon)


def _weighted_mean(mu, s: AnchorSet) -> np.ndarray:
    x = (mu / math.fsum(mu)) @ s.anchors
    # the exact value is a convex combination; clip away rounding outside the box
    return np.clip(x, s.anchors.min(axis=0), s.anchors.max(axis=0))


def irls_step(x, s: AnchorSet, params: LpParams) -> np.ndarray:
    return _weighted_mean(irls_weights(x, s, params), s)


def nlm_init(s: AnchorSet) -> np.ndarray:
    """The w-weighted mean of the anchors (one IRLS step at p = 2)."""
    return _weighted_mean(s.weights, s)


def solve(x0, s: AnchorSet, params: LpParams, cfg: IrlsConfig = IrlsConfig()) -> SolverTrace:
    """Run IRLS from ``x0`` (``None`` selects :func:`nlm_init`).

    Raises
    ------
    DimensionMismatchError
        If ``x0`` and the anchors differ in dimension.
    InvariantViolationError
        With ``cfg.verify_invariants``, if a fixed-eps step raises the cost or
        falls short of the surrogate's guaranteed decrease by more than 8 ulps.
    """
    if x0 is None:
        x = nlm_init(s)
    else:
        x = lpcore._as_vector(x0, s.d).copy()
        if not np.all(np.isfinite(x)):
            raise ValueError("x0 must be finite")
    step_tol = cfg.step_tol if cfg.step_tol is not None else 1e-8 * s.spread
    schedule = cfg.epsilon_schedule
    target_eps = params.epsilon

    iterates = [x]
    costs = [lpcore.cost(x, s, params)]
    step_norms, mu_sums, eps_used = [], [], []
    termination = Termination.MAX_ITERS

    for t in range(int(cfg.max_iters)):
        eps_t = target_eps if schedule == "fixed" else schedule.epsilon_at(t, target_eps)
        at_target = eps_t == target_eps
        mu = lpcore.lp_weights(lpcore._sq_dists(x, s)[2], s.weights, params.p, eps_t)
        x_new = _weighted_mean(mu, s)
        mu_sum = math.fsum(mu)
        step = float(np.linalg.norm(x_new - x))
        c_new = lpcore.cost(x_new, s, params)

        if cfg.verify_invariants and at_target:
            _check_step(t, costs[-1], c_new, step, mu_sum, params.p)

        iterates.append(x_new)
        costs.append(c_new)
        step_norms.append(step)
        mu_sums.append(mu_sum)
        eps_used.append(eps_t)
        x = x_new

        if not at_target:
            continue
        if step <= step_tol:
            termination = Termination.STEP_TOL
            break
        if cfg.cost_tol is not None and costs[-2] - c_new <= cfg.cost_tol:
            termination = Termination.COST_TOL
            break

    return SolverTrace(
        iterates=iterates,
        costs=costs,
        step_norms=step_norms,
        termination=termination,
        epsilon_used=eps_used,
        mu_sums=mu_sums,
        final_gradient_norm=float(np.linalg.norm(lpcore.gradient(x, s, params))),
    )


def _check_step(t, c_old, c_new, step, mu_sum, p):
    slack = ulp_slack(c_old)
    if c_new > c_old + slack:
        raise InvariantViolationError(
            f"cost increased at step {t}: {c_old!r} -> {c_new!r}")
    guaranteed = 0.5 * p * mu_sum * step * step
    if c_new > c_old - guaranteed + slack:
        raise InvariantViolationError(
            f"step {t} decreased the cost by {c_old - c_new!r}, "
            f"less than the surrogate bound {guaranteed!r}")
