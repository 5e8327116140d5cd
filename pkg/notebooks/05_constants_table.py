"""
Constants for the sharp ring
============================

Theoretical shape constants U, I, A and the empirical N * e for uniform,
isotropic greedy and anisotropic greedy triangulations as the ring sharpens.
Uniform and isotropic constants blow up as delta shrinks; the anisotropic
one stays put. This takes a few minutes at N = 8192.
"""

# %%
import sys

from anisofit import analysis as A

N = int(sys.argv[1]) if len(sys.argv) > 1 else A.TABLE_N
rows = A.constants_table([0.2, 0.1, 0.05], N=N)
print(A.constants_csv(rows))

# %%
for a, b in zip(rows, rows[1:]):
    print(f"delta {a.delta} -> {b.delta}: C_U x{b.C_U / a.C_U:.3f}, C_I x{b.C_I / a.C_I:.3f}, "
          f"C_A x{b.C_A / a.C_A:.3f}")
