"""Newton and gradient-descent solvers for the smoothed lp cost.

These exist for comparison with IRLS: iteration counts, wall time, and how
each method behaves from a poor starting point in the non-convex regime.
Failures (divergence, a singular Hessian, a non-descent Newton direction
under line search) end the run with the matching :class:`Termination`
instead of raising.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import lpcore
from .irls import SolverTrace, Termination
from .lpcore import AnchorSet, LpParams

__all__ = ["BaselineConfig", "newton_solve", "gradient_descent_solve", "run_baseline"]

_COND_LIMIT = 1e14


@dataclass(frozen=True)
class BaselineConfig:
    """Settings shared by the Newton and gradient-descent solvers.

    ``line_search`` is ``"none"`` or ``"backtracking"`` (Armijo constant
    ``armijo_c``, step shrink factor ``shrink``, initial step 1).
    The run is declared diverged once an iterate is farther than
    ``divergence_radius * spread`` from the anchor centroid.
    """

    method: str = "newton"
    max_iters: int = 500
    step_tol: Optional[float] = None
    line_search: str = "none"
    armijo_c: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 60
    divergence_radius: float = 1e3

    def __post_init__(self):
        if self.method not in ("newton", "gradient_descent"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.line_search not in ("none", "backtracking"):
            raise ValueError(f"unknown line search {self.line_search!r}")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.divergence_radius > 1:
            raise ValueError("divergence_radius must be > 1")
        if self.step_tol is not None and not self.step_tol > 0:
            raise ValueError("step_tol must be > 0")


def _backtrack(x, direction, fx, slope, s, params, cfg):
    t = 1.0
    for _ in range(cfg.max_backtracks):
        cand = x + t * direction
        fc = lpcore.cost(cand, s, params)
        if fc <= fx + cfg.armijo_c * t * slope:
            return cand, fc
        t *= cfg.shrink
    return None, None


def _run(x0, s, params, cfg, direction_fn, name):
    x = lpcore._as_vector(x0, s.d).copy() if x0 is not None else s.anchors.mean(axis=0)
    step_tol = cfg.step_tol if cfg.step_tol is not None else 1e-8 * s.spread
    centroid = s.anchors.mean(axis=0)
    limit = cfg.divergence_radius * s.spread

    iterates, costs, steps = [x], [lpcore.cost(x, s, params)], []
    termination = Termination.MAX_ITERS
    for _ in range(int(cfg.max_iters)):
        g = lpcore.gradient(x, s, params)
        direction = direction_fn(x, g)
        if direction is None or not np.all(np.isfinite(direction)):
            termination = Termination.SINGULAR_HESSIAN
            break
        if cfg.line_search == "backtracking":
            slope = float(g @ direction)
            if slope > 0:
                # indefinite Hessian produced an ascent direction
                termination = Termination.SINGULAR_HESSIAN
                break
            x_new, c_new = _backtrack(x, direction, costs[-1], slope, s, params, cfg)
            if x_new is None:
                x_new, c_new = x, costs[-1]
        else:
            x_new = x + direction
            c_new = lpcore.cost(x_new, s, params) if np.all(np.isfinite(x_new)) else math.inf

        step = float(np.linalg.norm(x_new - x))
        iterates.append(x_new)
        costs.append(c_new)
        steps.append(step)
        x = x_new
        if not np.all(np.isfinite(x)) or np.linalg.norm(x - centroid) > limit:
            termination = Termination.DIVERGED
            break
        if step <= step_tol:
            termination = Termination.STEP_TOL
            break

    grad_norm = float(np.linalg.norm(lpcore.gradient(x, s, params))) if np.all(np.isfinite(x)) else math.inf
    return SolverTrace(
        iterates=iterates,
        costs=costs,
        step_norms=steps,
        termination=termination,
        final_gradient_norm=grad_norm,
        solver=name,
    )


def newton_solve(x0, s: AnchorSet, params: LpParams, cfg: BaselineConfig = BaselineConfig()) -> SolverTrace:
    """Newton's method, ``x <- x - H(x)^-1 grad(x)``, optionally with backtracking.

    Indefinite Hessians are used as they are; without line search such steps
    often carry the iterate away from the anchors.
    """

    def direction(x, g):
        h = lpcore.hessian(x, s, params)
        if np.linalg.cond(h) > _COND_LIMIT:
            return None
        try:
            return -np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            return None

    return _run(x0, s, params, cfg, direction, "newton")


def gradient_descent_solve(x0, s: AnchorSet, params: LpParams,
                           cfg: BaselineConfig = BaselineConfig(method="gradient_descent",
                                                                line_search="backtracking")) -> SolverTrace:
    """Steepest descent with Armijo backtracking (or unit steps with ``line_search="none"``)."""
    return _run(x0, s, params, cfg, lambda x, g: -g, "gradient_descent")


def run_baseline(x0, s: AnchorSet, params: LpParams, cfg: BaselineConfig) -> SolverTrace:
    if cfg.method == "newton":
        return newton_solve(x0, s, params, cfg)
    return gradient_descent_solve(x0, s, params, cfg)
