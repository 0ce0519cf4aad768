"""
Measuring the linear rate
=========================

Near a minimizer with a positive definite Hessian the cost gap shrinks
geometrically. We fit that factor from a trace and compare it with the bound
nu = 1 - lambda_min(H) / (p sum mu) evaluated at the limit.

Writes ``convergence_rate.png`` next to this script when matplotlib is present.
"""

# %%
import pathlib

import numpy as np

from nlpr_irls import IrlsConfig, LpParams, irls, surrogate, sweep

rng = np.random.default_rng(12)
s = sweep.random_instance(rng)
params = LpParams(1.0, 1e-2)
x_star, cost_star = surrogate.reference_minimizer(s, params)
trace = irls.solve(None, s, params, IrlsConfig(max_iters=5000, step_tol=1e-15))
diag = surrogate.fit_linear_rate(trace, cost_star, s, params, x_star, min_points=5)
print(f"d={s.d} n={s.n}  iterations={trace.n_iters}")
print(f"fitted factor {diag.nu_estimate:.4f}, bound nu {diag.nu_bound:.4f}")

# %% theta_t settles on nu; the bound is asymptotic, and on other instances theta_t
# approaches it from above.
for t, th in list(zip(diag.theta_steps, diag.theta_sequence))[:8]:
    print(t, f"{th:.6f}", f"{th - diag.nu_bound:+.2e}")

# %%
try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    ts, gaps = zip(*diag.log_gaps)
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.plot(ts, gaps, "o-", ms=3, label="log cost gap")
    ax.plot(ts, [gaps[0] + t * np.log(diag.nu_bound) for t in ts], "--", label="slope log nu")
    ax.set_xlabel("iteration")
    ax.legend()
    out = pathlib.Path(__file__).with_name("convergence_rate.png")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print("wrote", out)
