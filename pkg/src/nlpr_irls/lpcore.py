"""Regularized weighted lp objective and its analytic derivatives.

The objective is the smoothed Fermat-Weber cost

    phi(x) = sum_j w_j (||x - a_j||^2 + eps)^(p/2),    0 < p <= 2, eps > 0,

whose gradient and Hessian are available in closed form. Vectors are 1-D
float64 arrays; an anchor set stores the points ``a_j`` as the rows of an
``(n, d)`` array.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatchError

__all__ = [
    "LpParams",
    "AnchorSet",
    "regularized_norm_sq",
    "cost",
    "unregularized_cost",
    "gradient",
    "hessian",
    "smallest_hessian_eigenvalue",
    "lp_weights",
]


@dataclass(frozen=True)
class LpParams:
    """Exponent ``p`` in (0, 2] and smoothing ``epsilon`` > 0."""

    p: float
    epsilon: float = 1e-6

    def __post_init__(self):
        p, eps = float(self.p), float(self.epsilon)
        if not (0.0 < p <= 2.0):
            raise ValueError(f"p must lie in (0, 2], got {self.p!r}")
        if not (eps > 0.0 and math.isfinite(eps)):
            raise ValueError(f"epsilon must be finite and > 0, got {self.epsilon!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "epsilon", eps)


@dataclass(frozen=True, eq=False)
class AnchorSet:
    """Anchor points ``a_j`` (rows of ``anchors``) with positive weights ``w_j``."""

    anchors: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        a = np.asarray(self.anchors, dtype=np.float64)
        if a.ndim == 1:
            # a 1-D list of scalars is read as n points on the line
            a = a[:, None]
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("anchors must be a non-empty (n, d) array")
        if not np.all(np.isfinite(a)):
            raise ValueError("anchors must be finite")
        if self.weights is None:
            w = np.ones(a.shape[0])
        else:
            w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != a.shape[0]:
            raise DimensionMismatchError(
                f"{a.shape[0]} anchors but {w.shape[0]} weights")
        if not (np.all(np.isfinite(w)) and np.all(w > 0)):
            raise ValueError("weights must be finite and strictly positive")
        a.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "anchors", a)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.anchors.shape[0]

    @property
    def d(self) -> int:
        return self.anchors.shape[1]

    @property
    def weight_sum(self) -> float:
        return math.fsum(self.weights)

    @property
    def spread(self) -> float:
        """Largest coordinate range of the anchors, or 1.0 if they coincide.

        Used as the length scale for tolerances and initialization boxes.
        """
        extent = float(np.max(np.ptp(self.anchors, axis=0)))
        return extent if extent > 0 else 1.0

    def permuted(self, perm) -> "AnchorSet":
        perm = np.asarray(perm)
        return AnchorSet(self.anchors[perm], self.weights[perm])


def _as_vector(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != d:
        raise DimensionMismatchError(f"vector has dimension {x.shape[0]}, expected {d}")
    return x


def _sq_dists(x, s: AnchorSet):
    x = _as_vector(x, s.d)
    diff = x - s.anchors
    return x, diff, np.einsum("ij,ij->i", diff, diff)


def regularized_norm_sq(x, epsilon: float) -> float:
    """Return ``||x||^2 + epsilon``."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    return float(x @ x) + float(epsilon)


def lp_weights(sq_dists, weights, p: float, epsilon: float) -> np.ndarray:
    """IRLS weights ``w_j (r_j^2 + eps)^(p/2 - 1)`` from squared distances.

    No validation of ``epsilon``: with ``epsilon = 0`` this is the
    unregularized reweighting, used only as a test oracle.
    """
    return weights * np.power(sq_dists + epsilon, 0.5 * p - 1.0)


def cost(x, s: AnchorSet, params: LpParams) -> float:
    _, _, r2 = _sq_dists(x, s)
    terms = s.weights * np.power(r2 + params.epsilon, 0.5 * params.p)
    # exact summation keeps ulp-level cost comparisons meaningful
    return math.fsum(terms)


def unregularized_cost(x, s: AnchorSet, p: float) -> float:
    """The plain ``sum_j w_j ||x - a_j||^p`` (``epsilon = 0``), for oracles."""
    _, _, r2 = _sq_dists(x, s)
    return math.fsum(s.weights * np.power(np.sqrt(r2), p))


def gradient(x, s: AnchorSet, params: LpParams) -> np.ndarray:
    _, diff, r2 = _sq_dists(x, s)
    mu = lp_weights(r2, s.weights, params.p, params.epsilon)
    return params.p * (mu @ diff)


def hessian(x, s: AnchorSet, params: LpParams) -> np.ndarray:
    """Analytic Hessian.

    ``p sum_j w_j |r_j|^(p-4) [ |r_j|^2 I - (2 - p) r_j r_j^T ]`` with
    ``|r|^2 = ||r||^2 + eps``.
    """
    p = params.p
    _, diff, r2 = _sq_dists(x, s)
    reg = r2 + params.epsilon
    diag = p * math.fsum(s.weights * np.power(reg, 0.5 * p - 1.0))
    outer_w = p * (2.0 - p) * s.weights * np.power(reg, 0.5 * p - 2.0)
    h = -(diff.T * outer_w) @ diff
    h[np.diag_indices_from(h)] += diag
    return 0.5 * (h + h.T)


def smallest_hessian_eigenvalue(x, s: AnchorSet, params: LpParams) -> float:
    return float(np.linalg.eigvalsh(hessian(x, s, params))[0])
