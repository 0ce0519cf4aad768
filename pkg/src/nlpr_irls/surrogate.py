"""Quadratic majorizer of the lp cost and linear-rate diagnostics.

At an iterate ``x_t`` the surrogate

    psi_t(x) = phi(x_t) + (x - x_t)^T grad phi(x_t) + (p/2) sum_j mu_j ||x - x_t||^2

lies above ``phi`` everywhere, touches it at ``x_t``, and its minimizer is the
IRLS update. The contraction diagnostics compare the per-step factor ``theta_t``
with the asymptotic bound ``nu = 1 - lambda_min(H(x*)) / (p sum_j mu_j(x*))``.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import irls, lpcore
from .exceptions import DegenerateDenominatorError, InsufficientDataError
from .lpcore import AnchorSet, LpParams

__all__ = [
    "SurrogateAt",
    "RateDiagnostics",
    "build_surrogate",
    "surrogate_value",
    "surrogate_minimizer",
    "scalar_majorization_gap",
    "majorization_gap",
    "theta_t",
    "nu_bound",
    "reference_minimizer",
    "fit_linear_rate",
]

_SERIES_RADIUS = 0.25
_SERIES_TERMS = 40


@dataclass(frozen=True)
class SurrogateAt:
    """Quadratic majorizer at ``center``.

    ``terms`` optionally carries ``(anchors, mu, p, epsilon)`` from the
    instance. With it, values are summed from non-negative pieces,
    ``(1 - p/2) phi(x_t) + (p/2) sum_j mu_j (||x - a_j||^2 + eps)``, which is
    the same function as the tangent form but free of cancellation.
    """

    center: np.ndarray
    cost_at_center: float
    gradient_at_center: np.ndarray
    curvature: float  # (p/2) * sum_j mu_j
    terms: Optional[tuple] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.curvature > 0:
            raise ValueError("surrogate curvature must be positive")


def build_surrogate(x, s: AnchorSet, params: LpParams) -> SurrogateAt:
    x = lpcore._as_vector(x, s.d)
    mu = irls.irls_weights(x, s, params)
    return SurrogateAt(
        center=x,
        cost_at_center=lpcore.cost(x, s, params),
        gradient_at_center=lpcore.gradient(x, s, params),
        curvature=0.5 * params.p * math.fsum(mu),
        terms=(s.anchors, mu, params.p, params.epsilon),
    )


def surrogate_value(srg: SurrogateAt, x) -> float:
    x = lpcore._as_vector(x, srg.center.shape[0])
    dx = x - srg.center
    if not np.any(dx):
        return srg.cost_at_center
    if srg.terms is None:
        return srg.cost_at_center + float(dx @ srg.gradient_at_center) + srg.curvature * float(dx @ dx)
    anchors, mu, p, eps = srg.terms
    diff = x - anchors
    beta = np.einsum("ij,ij->i", diff, diff) + eps
    q = 0.5 * p
    return (1.0 - q) * srg.cost_at_center + q * math.fsum(mu * beta)


def surrogate_minimizer(srg: SurrogateAt) -> np.ndarray:
    return srg.center - srg.gradient_at_center / (2.0 * srg.curvature)


def _pow_excess(delta, q):
    """``(1 + delta)**q - 1 - q*delta`` without cancellation near ``delta = 0``."""
    delta = np.asarray(delta, dtype=np.float64)
    out = np.empty_like(delta)
    small = np.abs(delta) < _SERIES_RADIUS
    if np.any(~small):
        d = delta[~small]
        out[~small] = np.expm1(q * np.log1p(d)) - q * d
    if np.any(small):
        d = delta[small]
        coef = q * (q - 1.0) / 2.0
        term = coef * d * d
        acc = term.copy()
        for k in range(3, _SERIES_TERMS):
            coef *= (q - k + 1.0) / k
            term = coef * d ** k
            acc += term
        out[small] = acc
    return out


def _gap_terms(alpha, beta_minus_alpha, p):
    q = 0.5 * p
    if q == 0.0 or q == 1.0:
        # linear or constant in beta: the gap vanishes identically
        return np.zeros_like(np.asarray(beta_minus_alpha / alpha, dtype=np.float64))
    return -np.power(alpha, q) * _pow_excess(beta_minus_alpha / alpha, q)


def scalar_majorization_gap(alpha: float, beta: float, p: float) -> float:
    """``alpha^(p/2) - beta^(p/2) + (p/2) alpha^(p/2 - 1) (beta - alpha)``.

    Non-negative for ``alpha, beta > 0`` and ``0 <= p <= 2`` by concavity of
    ``s -> s^(p/2)``; evaluated in a cancellation-free form.
    """
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be > 0")
    if not (0.0 <= p <= 2.0):
        raise ValueError("p must lie in [0, 2]")
    return float(_gap_terms(np.float64(alpha), np.float64(beta) - np.float64(alpha), p))


def majorization_gap(x, x_t, s: AnchorSet, params: LpParams) -> float:
    """``psi_t(x) - phi(x)`` summed term by term from the scalar gaps."""
    x = lpcore._as_vector(x, s.d)
    x_t = lpcore._as_vector(x_t, s.d)
    diff_t = x_t - s.anchors
    alpha = np.einsum("ij,ij->i", diff_t, diff_t) + params.epsilon
    dx = x - x_t
    # beta - alpha = (x - x_t) . (x + x_t - 2 a_j), exact in the small-step limit
    b_minus_a = (x + x_t - 2.0 * s.anchors) @ dx
    return math.fsum(s.weights * _gap_terms(alpha, b_minus_a, params.p))


def theta_t(x_star, x_t, s: AnchorSet, params: LpParams) -> float:
    """Contraction factor ``2 (psi_t(x*) - phi(x*)) / (p ||x* - x_t||^2 sum_j mu_j)``."""
    x_star = lpcore._as_vector(x_star, s.d)
    x_t = lpcore._as_vector(x_t, s.d)
    dist2 = float(np.sum((x_star - x_t) ** 2))
    if math.sqrt(dist2) < 1e-14 * s.spread:
        raise DegenerateDenominatorError("x_t coincides with x_star")
    mu_sum = math.fsum(irls.irls_weights(x_t, s, params))
    gap = majorization_gap(x_star, x_t, s, params)
    return 2.0 * gap / (params.p * dist2 * mu_sum)


def nu_bound(x_star, s: AnchorSet, params: LpParams):
    """Return ``(nu, hessian_pd)`` at a converged point.

    ``nu = 1 - lambda_min(H(x*)) / (p sum_j mu_j(x*))``; ``hessian_pd`` flags
    whether the Hessian at ``x_star`` is positive definite. For p >= 1 it
    always is and ``0 <= nu < 1``.
    """
    lam = lpcore.smallest_hessian_eigenvalue(x_star, s, params)
    mu_sum = math.fsum(irls.irls_weights(x_star, s, params))
    return 1.0 - lam / (params.p * mu_sum), bool(lam > 0)


def reference_minimizer(s: AnchorSet, params: LpParams, x0=None,
                        max_iters: int = 10000, step_tol: float = 1e-14):
    """High-accuracy limit point: a tight IRLS solve plus one Newton polish.

    The polish is kept only when the Hessian is positive definite and it does
    not raise the cost. Returns ``(x_star, cost_star)``.
    """
    cfg = irls.IrlsConfig(max_iters=max_iters, step_tol=step_tol * s.spread,
                          verify_invariants=False)
    x = irls.solve(x0, s, params, cfg).x
    h = lpcore.hessian(x, s, params)
    if np.linalg.eigvalsh(h)[0] > 0:
        cand = x - np.linalg.solve(h, lpcore.gradient(x, s, params))
        if np.all(np.isfinite(cand)) and lpcore.cost(cand, s, params) <= lpcore.cost(x, s, params):
            x = cand
    return x, lpcore.cost(x, s, params)


@dataclass
class RateDiagnostics:
    theta_sequence: list
    nu_estimate: float
    nu_bound: float
    log_gap_slope: float
    hessian_pd: bool = False
    theta_steps: list = field(default_factory=list)
    log_gaps: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        """``nu_estimate <= nu_bound + 0.05`` (meaningful when the Hessian is PD)."""
        return self.nu_estimate <= self.nu_bound + 0.05

    def to_csv(self) -> str:
        lines = ["t,theta_t,log_gap"]
        thetas = dict(zip(self.theta_steps, self.theta_sequence))
        for t, lg in self.log_gaps:
            th = thetas.get(t)
            lines.append(f"{t},{'' if th is None else repr(th)},{lg!r}")
        lines.append(f"# nu_estimate={self.nu_estimate!r} nu_bound={self.nu_bound!r} "
                     f"hessian_pd={str(self.hessian_pd).lower()}")
        return "\n".join(lines) + "\n"


def usable_steps(trace, cost_star: float) -> list:
    """Indices ``t`` whose cost gap exceeds the float noise floor."""
    floor = 1e-13 * abs(cost_star)
    return [t for t, c in enumerate(trace.costs) if c - cost_star > floor]


def fit_linear_rate(trace, cost_star: float, s: AnchorSet = None,
                    params: LpParams = None, x_star=None, min_points: int = 10) -> RateDiagnostics:
    """Fit ``log(phi(x_t) - phi*)`` against ``t`` over the tail half of usable steps.

    ``nu_estimate = exp(slope)``. When the instance and ``x_star`` are given,
    ``theta_t`` over the same tail and ``nu_bound`` are filled in as well;
    otherwise those fields are NaN/empty.

    Raises
    ------
    InsufficientDataError
        If fewer than ``min_points`` iterates have a cost gap above
        ``1e-13 |phi*|``.
    """
    usable = usable_steps(trace, cost_star)
    if len(usable) < max(int(min_points), 2):
        raise InsufficientDataError(
            f"only {len(usable)} iterates above the cost-gap noise floor")
    log_gaps = [(t, math.log(trace.costs[t] - cost_star)) for t in usable]
    tail = log_gaps[len(log_gaps) // 2:]
    ts = np.array([t for t, _ in tail], dtype=np.float64)
    ys = np.array([g for _, g in tail])
    slope = float(np.polyfit(ts, ys, 1)[0])

    thetas, theta_ts = [], []
    nu, pd = math.nan, False
    if s is not None and params is not None and x_star is not None:
        nu, pd = nu_bound(x_star, s, params)
        for t, _ in tail:
            try:
                thetas.append(theta_t(x_star, trace.iterates[t], s, params))
                theta_ts.append(t)
            except DegenerateDenominatorError:
                continue
    return RateDiagnostics(
        theta_sequence=thetas,
        nu_estimate=math.exp(slope),
        nu_bound=nu,
        log_gap_slope=slope,
        hessian_pd=pd,
        theta_steps=theta_ts,
        log_gaps=log_gaps,
    )
