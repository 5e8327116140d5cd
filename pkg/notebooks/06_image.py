"""
Cartoon image
=============

A 256 x 256 disk raster approximated by piecewise affine functions on
triangles. Anisotropic bisection follows the edge with far fewer triangles
than newest-vertex bisection, although both reach zero error on the pixel
grid well before N = 2000.
"""

# %%
import os

import numpy as np

from anisofit import meshio
from anisofit import refine as R
from anisofit import targets as T

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out")
os.makedirs(OUT, exist_ok=True)

n = 256
px, py = T.RasterImage(n, n, np.zeros(n * n)).pixel_centers()
img = T.RasterImage(n, n, np.asarray(T.cartoon_disk().eval(px, py), dtype=float))
meshio.write_pgm(os.path.join(OUT, "disk.pgm"), img)
f = T.raster_target(img)

# %%
schedule = [125, 250, 500, 1000, 2000]
traces = {}
for strat in ("iso_newest_vertex", "aniso_tri"):
    tree, traces[strat] = R.run_to_N(f, R.RefineConfig(strategy=strat, degree=2, p=2.0, max_N=2000),
                                     schedule=schedule)
    doc = meshio.mesh_from_tree(tree, "pgm:disk.pgm")
    with open(os.path.join(OUT, f"disk_{strat}.svg"), "w") as fh:
        fh.write(meshio.write_svg(doc, "value"))

for a, b in zip(traces["iso_newest_vertex"], traces["aniso_tri"]):
    ratio = b.error / a.error if a.error > 0 else float("nan")
    print(f"N={a.N:5d}  iso {a.error:.4e}  aniso {b.error:.4e}  ratio {ratio:.3f}")
