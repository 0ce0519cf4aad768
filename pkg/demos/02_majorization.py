"""
Why IRLS never goes uphill
==========================

Each IRLS step minimizes a quadratic that touches the cost at the current
iterate and lies above it everywhere. We check both facts numerically.
"""

# %%
import numpy as np

from nlpr_irls import AnchorSet, LpParams, irls, lpcore, surrogate

s = AnchorSet([0.0, 1.0, 10.0], [1.0, 2.0, 1.0])
params = LpParams(0.5, 1e-3)
x_t = np.array([4.0])
srg = surrogate.build_surrogate(x_t, s, params)

for x in np.linspace(-2, 12, 8):
    psi = surrogate.surrogate_value(srg, [x])
    phi = lpcore.cost([x], s, params)
    print(f"x={x:6.2f}  surrogate={psi:9.4f}  cost={phi:9.4f}  gap={psi - phi:8.4f}")

# %% The minimizer of the quadratic is exactly the IRLS update.
print("surrogate minimizer", surrogate.surrogate_minimizer(srg))
print("irls step          ", irls.irls_step(x_t, s, params))

# %% The per-anchor inequality behind this is concavity of s -> s^(p/2).
for a, b in [(1.0, 4.0), (1e-4, 1.0), (10.0, 0.1)]:
    print(a, b, surrogate.scalar_majorization_gap(a, b, 0.5))
