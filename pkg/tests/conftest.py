import sys

import numpy as np
import pytest

from nlpr_irls.lpcore import AnchorSet, LpParams


def direct_cost(x, anchors, weights, p, eps):
    """Term-by-term scalar evaluation of sum_j w_j (||x - a_j||^2 + eps)^(p/2)."""
    total = 0.0
    for a, w in zip(np.atleast_2d(anchors), weights):
        r2 = sum((float(xi) - float(ai)) ** 2 for xi, ai in zip(np.atleast_1d(x), np.atleast_1d(a)))
        total += float(w) * (r2 + eps) ** (p / 2)
    return total


def grid_minimizer_1d(anchors, weights, p, eps, lo, hi, step=1e-5):
    xs = np.arange(lo, hi + 0.5 * step, step)
    f = np.zeros_like(xs)
    for a, w in zip(anchors, weights):
        f += w * ((xs - a) ** 2 + eps) ** (p / 2)
    return float(xs[np.argmin(f)])


def random_case(rng, p=None, eps=None, d_max=8, n_max=20):
    d = int(rng.integers(1, d_max + 1))
    n = int(rng.integers(1, n_max + 1))
    s = AnchorSet(rng.normal(size=(n, d)), rng.uniform(0.1, 1.0, size=n))
    p = p if p is not None else float(rng.choice([0.3, 0.5, 1.0, 1.5, 2.0]))
    eps = eps if eps is not None else float(rng.choice([1e-4, 1e-2, 1.0]))
    return s, LpParams(p, eps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
