# %% [markdown]
# # Hop weights
#
# The weight family `omega**l / ((l!)**rho * C)` slides between a geometric
# profile (`rho = 0`) and a Poisson profile (`rho = 1`). Small `rho` with
# `omega` just above 1 gives a long, flat tail that reaches far hops.

# %%
import numpy as np

from nodewise.ghd import build_ghd_table, hkpr_weight

# %%
for omega, rho in [(0.5, 0.0), (0.85, 0.0), (2.0, 1.0), (5.0, 1.0), (1.15, 0.06), (0.9, 1.15)]:
    t = build_ghd_table(omega, rho)
    head = np.array2string(t.weights[:6], precision=4, suppress_small=True)
    print(f"omega={omega:<5} rho={rho:<5} peak={t.peak():>3} len={t.length:>4} head={head}")

# %% [markdown]
# With `rho = 1` the table matches the closed-form Poisson weight.

# %%
t = build_ghd_table(5.0, 1.0)
print([round(t.weight(l) - hkpr_weight(5.0, l), 15) for l in range(8)])

# %% [markdown]
# Cumulative mass tells how much of the series a length-`L` walk retains.

# %%
smooth = build_ghd_table(1.15, 0.06)
for L in (2, 5, 10, 20, 40):
    print(L, round(smooth.mass(L), 4))
