"""Non-local means and non-local patch regression denoisers.

Images are 2-D float64 arrays indexed ``[row, col]`` with nominal range
[0, 255]. Each pixel is represented by its ``k x k`` patch (mirror-extended
at the borders); the search window of a pixel is the ``(2r+1) x (2r+1)``
block around it, clipped to the image and including the pixel itself.

NLPR replaces the weighted average of NLM with a weighted lp regression in
patch space, solved by IRLS, and keeps the center pixel of the fitted patch.
For p = 2 it reduces to NLM.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import irls
from .exceptions import DimensionMismatchError
from .irls import IrlsConfig
from .lpcore import AnchorSet, LpParams

__all__ = [
    "PatchConfig",
    "NlprConfig",
    "PixelSummary",
    "as_image",
    "extract_patch",
    "all_patches",
    "nlm_weight",
    "build_anchor_set",
    "nlm_denoise",
    "nlpr_denoise",
    "add_gaussian_noise",
    "mse",
    "psnr",
]


@dataclass(frozen=True)
class PatchConfig:
    k: int = 7
    search_radius: int = 10
    h: float = 100.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"patch size k must be an odd positive integer, got {self.k!r}")
        if int(self.search_radius) != self.search_radius or self.search_radius < 1:
            raise ValueError("search_radius must be a positive integer")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError("h must be finite and > 0")

    @property
    def d(self) -> int:
        return self.k * self.k


@dataclass(frozen=True)
class NlprConfig:
    """``init`` is ``"nlm"`` (weighted mean patch) or ``"noisy_patch"`` (the pixel's own patch)."""

    patch: PatchConfig = field(default_factory=PatchConfig)
    lp: LpParams = field(default_factory=lambda: LpParams(p=1.0, epsilon=1e-6))
    irls: IrlsConfig = field(default_factory=lambda: IrlsConfig(verify_invariants=False))
    init: str = "nlm"

    def __post_init__(self):
        if self.init not in ("nlm", "noisy_patch"):
            raise ValueError(f"init must be 'nlm' or 'noisy_patch', got {self.init!r}")


@dataclass
class PixelSummary:
    """Per-pixel solver outcome, each field shaped like the image."""

    iterations: np.ndarray
    final_step: np.ndarray
    monotone: np.ndarray
    termination: np.ndarray  # object array of Termination values

    def counts(self) -> dict:
        out = {}
        for term in self.termination.ravel():
            out[term.value] = out.get(term.value, 0) + 1
        return dict(sorted(out.items()))


def as_image(img) -> np.ndarray:
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("image must be a non-empty 2-D array")
    if not np.all(np.isfinite(a)):
        raise ValueError("image pixels must be finite")
    return a


def _index(img, i):
    h, w = img.shape
    if isinstance(i, (tuple, list)):
        r, c = int(i[0]), int(i[1])
    else:
        i = int(i)
        if not 0 <= i < h * w:
            raise IndexError(f"pixel index {i} out of range")
        r, c = divmod(i, w)
    if not (0 <= r < h and 0 <= c < w):
        raise IndexError(f"pixel {(r, c)} out of range")
    return r, c


def all_patches(img, k: int) -> np.ndarray:
    """Every pixel's row-major patch, shape ``(H, W, k*k)``."""
    img = as_image(img)
    half = k // 2
    padded = np.pad(img, half, mode="symmetric")
    view = sliding_window_view(padded, (k, k))
    return view.reshape(img.shape[0], img.shape[1], k * k)


def extract_patch(img, i, k: int) -> np.ndarray:
    """Patch of pixel ``i`` (linear index or ``(row, col)``), mirror-extended."""
    img = as_image(img)
    r, c = _index(img, i)
    half = k // 2
    rows = _mirror(np.arange(r - half, r + half + 1), img.shape[0])
    cols = _mirror(np.arange(c - half, c + half + 1), img.shape[1])
    return img[np.ix_(rows, cols)].ravel()


def _mirror(idx, n):
    # symmetric extension: -1 -> 0, n -> n-1 (edge sample repeated)
    period = 2 * n
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - 1 - idx, idx)


def nlm_weight(pi, pj, h: float) -> float:
    pi = np.asarray(pi, dtype=np.float64).ravel()
    pj = np.asarray(pj, dtype=np.float64).ravel()
    if pi.shape != pj.shape:
        raise DimensionMismatchError("patches differ in size")
    diff = pi - pj
    return math.exp(-float(diff @ diff) / (h * h))


def _window(shape, r, c, radius):
    r0, r1 = max(0, r - radius), min(shape[0], r + radius + 1)
    c0, c1 = max(0, c - radius), min(shape[1], c + radius + 1)
    return r0, r1, c0, c1


def _anchor_set(patches, r, c, cfg: PatchConfig):
    r0, r1, c0, c1 = _window(patches.shape[:2], r, c, cfg.search_radius)
    anchors = patches[r0:r1, c0:c1].reshape(-1, patches.shape[2])
    diff = anchors - patches[r, c]
    w = np.exp(-np.einsum("ij,ij->i", diff, diff) / (cfg.h * cfg.h))
    return anchors, w


def build_anchor_set(img, i, cfg: PatchConfig) -> AnchorSet:
    """Patches of the search window of pixel ``i`` with their NLM weights."""
    img = as_image(img)
    r, c = _index(img, i)
    anchors, w = _anchor_set(all_patches(img, cfg.k), r, c, cfg)
    return AnchorSet(anchors, w)


def nlm_denoise(img, cfg: PatchConfig) -> np.ndarray:
    img = as_image(img)
    patches = all_patches(img, cfg.k)
    out = np.empty_like(img)
    for r in range(img.shape[0]):
        for c in range(img.shape[1]):
            r0, r1, c0, c1 = _window(img.shape, r, c, cfg.search_radius)
            _, w = _anchor_set(patches, r, c, cfg)
            out[r, c] = (w @ img[r0:r1, c0:c1].ravel()) / math.fsum(w)
    return out


def nlpr_denoise(img, cfg: NlprConfig, workers: int = 1):
    """Denoise by per-pixel lp patch regression.

    Returns the image and a :class:`PixelSummary`. Rows are processed by
    ``workers`` threads; each pixel is written by exactly one of them, so the
    result does not depend on the worker count.
    """
    img = as_image(img)
    k = cfg.patch.k
    center = (k * k) // 2
    patches = all_patches(img, k)
    shape = img.shape
    out = np.empty(shape)
    iters = np.zeros(shape, dtype=np.int64)
    final_step = np.zeros(shape)
    monotone = np.ones(shape, dtype=bool)
    term = np.empty(shape, dtype=object)
    fixed_eps = cfg.irls.epsilon_schedule == "fixed"

    def do_row(r):
        for c in range(shape[1]):
            anchors, w = _anchor_set(patches, r, c, cfg.patch)
            s = AnchorSet(anchors, w)
            x0 = irls.nlm_init(s) if cfg.init == "nlm" else patches[r, c]
            tr = irls.solve(x0, s, cfg.lp, cfg.irls)
            out[r, c] = tr.x[center]
            iters[r, c] = tr.n_iters
            final_step[r, c] = tr.step_norms[-1] if tr.step_norms else 0.0
            monotone[r, c] = tr.monotone(epsilon=None if fixed_eps else cfg.lp.epsilon)
            term[r, c] = tr.termination

    if workers <= 1:
        for r in range(shape[0]):
            do_row(r)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(do_row, range(shape[0])))
    return out, PixelSummary(iters, final_step, monotone, term)


def add_gaussian_noise(img, sigma: float, seed=None) -> np.ndarray:
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    img = as_image(img)
    if sigma == 0:
        return img.copy()
    rng = np.random.default_rng(seed)
    return img + rng.normal(0.0, sigma, size=img.shape)


def mse(a, b) -> float:
    a, b = as_image(a), as_image(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"image shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(a, b, peak: float = 255.0) -> float:
    """PSNR in dB; ``inf`` for identical images."""
    m = mse(a, b)
    if m == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / m)
