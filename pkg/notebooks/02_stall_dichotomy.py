"""
Stall of the plain rectangle rule
=================================

On the oscillatory counterexample every candidate split leaves the sup error
unchanged, so the plain greedy rule keeps halving the same way and never
reduces the global error. The modified rule falls back to halving the longer
side whenever the best candidate fails to contract by rho.
"""

# %%
import math

from anisofit import refine as R
from anisofit import targets as T

f = T.oscillatory_counterexample()
schedule = [1, 4, 16, 64, 256]

# %%
_, plain = R.run_to_N(f, R.RefineConfig(strategy="aniso_rect", p=math.inf, max_N=256), schedule=schedule)
for row in plain:
    print("plain", row.N, row.error)

# %%
tree, mod = R.run_to_N(f, R.RefineConfig(strategy="aniso_rect_modified", p=math.inf, max_N=4096),
                       schedule=schedule + [1024, 4096])
for row in mod:
    print("modified", row.N, row.error)
print("share of safety splits:", tree.safety_fraction())

# %% [markdown]
# Changing rho moves the balance between greedy and safety splits.

# %%
for rho in (0.5, 1 / math.sqrt(2), 0.9):
    cfg = R.RefineConfig(strategy="aniso_rect_modified", p=math.inf, rho=rho, max_N=1024)
    tree, trace = R.run_to_N(f, cfg, schedule=[1, 1024])
    print(f"rho={rho:.3f}: e(1024)/e(1) = {trace[-1].error / trace[0].error:.4f}, "
          f"safety share {tree.safety_fraction():.3f}")
