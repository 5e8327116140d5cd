"""
Anisotropic rectangles on a ridge
=================================

f(x, y) = sin(2x + 3y) with the modified rectangle rule and p = inf. The
scaled error N^(1/2) e settles near a constant that sits between the shape
function lower bound and the upper cap.
"""

# %%
import math

from anisofit import analysis as A
from anisofit import refine as R
from anisofit import shape as S
from anisofit import targets as T

f = T.ridge_sine(2.0, 3.0)
schedule = [256, 512, 1024, 2048, 4096]

# %%
recs = A.convergence_run(f, R.RefineConfig(strategy="aniso_rect_modified", p=math.inf), schedule)
for r in recs:
    print(r.N, r.error, r.scaled)
print("slope", A.fit_slope(recs))

# %%
print("upper cap   ", 20 * S.theoretical_constants(f, "A_rect", math.inf, tau=2.0))
print("lower bound ", 0.5 * S.theoretical_constants(f, "A_rect", math.inf, tau=2.0 / 3.0))

# %% [markdown]
# Optimal rectangle for a linear form: aspect ratio follows |qy| / |qx|.

# %%
q = S.LinearForm2(2.0, 3.0)
r = S.optimal_rect(q, 1.0)
print(r.width, r.height, S.K_rect(math.inf, q))
