"""
One-dimensional rates
=====================

Uniform against greedy dyadic piecewise constants for f(x) = x^alpha on [0, 1].
Uniform partitions saturate at N^-alpha near the singularity; greedy
refinement recovers N^-1.
"""

# %%
import math

from anisofit import analysis as A
from anisofit import refine as R
from anisofit import targets as T

schedule = [64, 128, 256, 512, 1024, 2048, 4096]

# %% [markdown]
# Smooth case first: sin(pi x) on a uniform grid, where N * e tends to pi/2.

# %%
for N in (256, 1024, 4096):
    print(N, N * A.uniform_1d_error(T.sin_1d(), N))

# %% [markdown]
# The square root is the classical example where adaptivity pays.

# %%
for alpha in (0.25, 0.5, 0.75):
    f = T.power_alpha(alpha)
    uni = A.uniform_1d_run(f, schedule)
    gre = A.convergence_run(f, R.RefineConfig(strategy="greedy_1d", p=math.inf), schedule)
    print(f"alpha={alpha}: uniform slope {A.fit_slope(uni):+.3f}, greedy slope {A.fit_slope(gre):+.3f}")

# %%
f = T.power_alpha(0.5)
recs = A.convergence_run(f, R.RefineConfig(strategy="greedy_1d", p=math.inf), schedule)
print(A.records_csv(recs))
