"""
IRLS against Newton
===================

Newton converges in fewer iterations on convex problems. For p < 1 the cost
is non-convex far from the anchors and a pure Newton step can be thrown
outwards, while IRLS stays inside the anchors' bounding box.
"""

# %%
import numpy as np

from nlpr_irls import AnchorSet, BaselineConfig, LpParams, baselines, irls

s = AnchorSet([0.0, 1.0, 10.0])
for p in (1.5, 0.5):
    params = LpParams(p, 1e-4)
    for x0 in (3.0, 500.0):
        ir = irls.solve([x0], s, params)
        nt = baselines.newton_solve([x0], s, params)
        ls = baselines.newton_solve([x0], s, params, BaselineConfig(line_search="backtracking"))
        print(f"p={p} x0={x0:>5}: irls {ir.n_iters:>3} it -> {ir.termination.value:<10}"
              f" newton {nt.n_iters:>3} it -> {nt.termination.value:<16}"
              f" newton+ls {ls.n_iters:>3} it -> {ls.termination.value}")

# %% The same comparison is available from the command line:
#    nlpr-irls bench-solvers --anchors "0;1;10" --p 0.5 --eps 1e-4 --far 50
