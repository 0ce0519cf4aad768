"""Random instances and the invariant checks run by ``nlpr-irls verify``."""

import itertools
from dataclasses import dataclass

import numpy as np

from . import irls, lpcore, surrogate
from .lpcore import AnchorSet, LpParams

__all__ = [
    "random_instance",
    "standard_sweep",
    "CheckResult",
    "run_checks",
    "SWEEPS",
    "ball_samples",
    "fd_gradient",
    "fd_hessian",
    "format_table",
    "all_ok",
]

SWEEP_PS = (0.3, 0.5, 1.0, 1.5, 2.0)
SWEEP_EPS = (1e-4, 1e-2, 1.0)
SWEEPS = {"tiny": 15, "default": 100, "full": 500}


def random_instance(rng, d_max: int = 8, n_max: int = 20) -> AnchorSet:
    """Standard-normal anchors with weights uniform on [0.1, 1]."""
    d = int(rng.integers(1, d_max + 1))
    n = int(rng.integers(1, n_max + 1))
    return AnchorSet(rng.normal(size=(n, d)), rng.uniform(0.1, 1.0, size=n))


def standard_sweep(count: int, seed: int = 0, ps=SWEEP_PS, epsilons=SWEEP_EPS):
    """Yield ``(anchors, params, x)`` with ``(p, eps)`` cycling over the grid.

    ``x`` is a random point in a box of half-width 3 around the origin.
    """
    rng = np.random.default_rng(seed)
    grid = list(itertools.product(ps, epsilons))
    for i in range(count):
        p, eps = grid[i % len(grid)]
        s = random_instance(rng)
        yield s, LpParams(p, eps), rng.uniform(-3.0, 3.0, size=s.d)


def ball_samples(rng, center, radius: float, count: int) -> np.ndarray:
    """``count`` points uniform in the Euclidean ball around ``center``."""
    center = np.asarray(center, dtype=np.float64)
    d = center.shape[0]
    u = rng.normal(size=(count, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(count, 1)) ** (1.0 / d)
    return center + r * u


def fd_gradient(f, x, step: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2 * step)
    return g


def fd_hessian(grad, x, step: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        cols.append((grad(x + e) - grad(x - e)) / (2 * step))
    h = np.column_stack(cols)
    return 0.5 * (h + h.T)


def _rel_err(a, b) -> float:
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    return float(np.linalg.norm(a - b) / scale) if scale > 0 else 0.0


@dataclass
class CheckResult:
    name: str
    checked: int = 0
    failed: int = 0
    worst: float = 0.0

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def record(self, passed: bool, margin: float = 0.0):
        self.checked += 1
        self.failed += not passed
        self.worst = max(self.worst, margin)


def _check_instance(s, params, x, rng, res):
    f = lambda z: lpcore.cost(z, s, params)
    g = lambda z: lpcore.gradient(z, s, params)

    err = _rel_err(g(x), fd_gradient(f, x))
    res["gradient"].record(err <= 1e-5, err)
    err = _rel_err(lpcore.hessian(x, s, params), fd_hessian(g, x))
    res["hessian"].record(err <= 1e-4, err)

    cfg = irls.IrlsConfig(verify_invariants=False)
    trace = irls.solve(x, s, params, cfg)
    lo, hi = s.anchors.min(axis=0), s.anchors.max(axis=0)
    for t in range(trace.n_iters):
        c0, c1 = trace.costs[t], trace.costs[t + 1]
        slack = irls.ulp_slack(c0)
        res["relaxation"].record(c1 <= c0 + slack, max(0.0, c1 - c0))
        dec = 0.5 * params.p * trace.mu_sums[t] * trace.step_norms[t] ** 2
        res["descent_bound"].record(c1 <= c0 - dec + slack, max(0.0, c1 - c0 + dec))
        xt = trace.iterates[t + 1]
        res["hull"].record(bool(np.all(xt >= lo) and np.all(xt <= hi)))

    xt = trace.iterates[min(1, trace.n_iters)]
    srg = surrogate.build_surrogate(xt, s, params)
    for z in ball_samples(rng, xt, 5.0 * s.spread, 50):
        gap = surrogate.surrogate_value(srg, z) - lpcore.cost(z, s, params)
        res["majorization"].record(gap >= -irls.ulp_slack(lpcore.cost(z, s, params)), max(0.0, -gap))

    m = surrogate.surrogate_minimizer(srg)
    step = irls.irls_step(xt, s, params)
    scale = np.maximum.reduce([np.abs(xt), np.abs(m - xt), np.abs(s.anchors).max(axis=0)])
    ulps = float(np.max(np.abs(m - step) / np.spacing(scale)))
    res["surrogate_step"].record(ulps <= 4, ulps)


def _check_scalar_gap(res):
    grid = np.logspace(-6, 6, 25)
    for p in (0.0, 0.3, 0.5, 1.0, 1.7, 2.0):
        for a in grid:
            for b in grid:
                gap = surrogate.scalar_majorization_gap(a, b, p)
                slack = 8 * np.spacing(max(a, b) ** (p / 2))
                res["scalar_gap"].record(gap >= -slack, max(0.0, -gap))


def run_checks(count: int, seed: int = 0) -> list:
    names = ["gradient", "hessian", "relaxation", "descent_bound", "hull",
             "majorization", "surrogate_step", "scalar_gap"]
    res = {n: CheckResult(n) for n in names}
    rng = np.random.default_rng(seed + 1)
    for s, params, x in standard_sweep(count, seed):
        _check_instance(s, params, x, rng, res)
    _check_scalar_gap(res)
    return [res[n] for n in names]


def format_table(results) -> str:
    lines = [f"{'check':<16}{'checked':>9}{'failed':>8}{'worst':>12}  status"]
    for r in results:
        lines.append(f"{r.name:<16}{r.checked:>9}{r.failed:>8}{r.worst:>12.3e}  "
                     f"{'PASS' if r.ok else 'FAIL'}")
    return "\n".join(lines)


def all_ok(results) -> bool:
    return all(r.ok for r in results)

