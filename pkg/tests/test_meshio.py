import math

import numpy as np
import pytest

from anisofit import meshio as M
from anisofit import refine as R
from anisofit import shape as S
from anisofit import targets as T


def test_read_p2(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P2\n# comment\n2 2\n255\n0 255\n0 255\n")
    img = M.read_pgm(path)
    assert (img.width, img.height) == (2, 2)
    assert img.samples.tolist() == [0.0, 1.0, 0.0, 1.0]


def test_read_p5_8_and_16_bit():
    img = M.parse_pgm(b"P5 2 2 255\n" + bytes([0, 51, 102, 255]))
    assert np.allclose(img.samples, [0, 0.2, 0.4, 1.0])
    img16 = M.parse_pgm(b"P5\n1 2\n65535\n" + bytes([0xFF, 0xFF, 0x00, 0x00]))
    assert img16.samples.tolist() == [1.0, 0.0]


def test_pgm_errors():
    with pytest.raises(M.FormatError, match="expected 4 bytes, got 3"):
        M.parse_pgm(b"P5 2 2 255\n" + bytes(3))
    with pytest.raises(M.FormatError, match="expected 4 samples, got 2"):
        M.parse_pgm(b"P2 2 2 255\n1 2\n")
    with pytest.raises(M.FormatError, match="magic"):
        M.parse_pgm(b"P6 2 2 255\n" + bytes(12))
    with pytest.raises(M.FormatError, match="header"):
        M.parse_pgm(b"P5 2\n")
    with pytest.raises(M.FormatError, match="maxval"):
        M.parse_pgm(b"P2 1 1 70000\n1\n")


def test_pgm_write_read(tmp_path):
    img = T.RasterImage(3, 2, [0, 0.2, 0.4, 0.6, 0.8, 1.0])
    for binary in (True, False):
        M.write_pgm(tmp_path / "x.pgm", img, binary=binary)
        back = M.read_pgm(tmp_path / "x.pgm")
        assert np.allclose(back.samples, img.samples, atol=1 / 255)


def sample_mesh(strategy="aniso_tri_modified", N=60):
    m = 1 if "rect" in strategy else 2
    tree, _ = R.run_to_N(T.sharp_ring(0.2), R.RefineConfig(strategy=strategy, degree=m, p=2.0, max_N=N))
    return M.mesh_from_tree(tree, "sharp_ring:0.2")


@pytest.mark.parametrize("strategy", ["aniso_tri_modified", "aniso_rect"])
def test_mesh_round_trip_byte_identical(strategy):
    doc = sample_mesh(strategy)
    text = M.format_mesh(doc)
    again = M.format_mesh(M.parse_mesh(text))
    assert again == text
    back = M.parse_mesh(text)
    assert back.N == doc.N == 60
    assert back.leaves[3].coefficients == doc.leaves[3].coefficients
    assert back.metadata["target"] == "sharp_ring:0.2"


def test_mesh_parse_errors():
    with pytest.raises(M.FormatError, match="first line"):
        M.parse_mesh("hello\n")
    with pytest.raises(M.FormatError, match="line 2"):
        M.parse_mesh(M.MESH_MAGIC + "\nleaf tri 1 2\n")
    text = M.format_mesh(sample_mesh(N=5)).replace("leaves 5", "leaves 6")
    with pytest.raises(M.FormatError, match="declares 6"):
        M.parse_mesh(text)


def test_svg_polygons():
    doc = sample_mesh(N=40)
    for coloring in ("none", "value"):
        assert M.write_svg(doc, coloring).count("<polygon") == 40
    one = M.MeshDocument({}, [M.MeshLeaf("rect", (0, 1, 0, 1), 0.0, 0, "root", (0.5,))])
    assert M.write_svg(one).count("<polygon") == 1


def test_svg_sigma_coloring():
    doc = sample_mesh(N=40)
    Q = S.QuadForm2(1, 0, 1)
    svg = M.write_svg(doc, "sigma_threshold", Q, math.inf)
    assert svg.count('fill="white"') == 40
    svg = M.write_svg(doc, "sigma_threshold", Q, 0.5)  # sigma >= 1 always
    assert svg.count('fill="grey"') == 40
    with pytest.raises(ValueError):
        M.write_svg(doc, "sigma_threshold")
    with pytest.raises(ValueError):
        M.write_svg(doc, "rainbow")


def test_svg_stroke_scales_with_smallest_leaf():
    import re

    coarse = M.write_svg(sample_mesh(N=10))
    fine = M.write_svg(sample_mesh(N=400))
    width = lambda s: float(re.search(r'stroke-width="([0-9.e-]+)"', s).group(1))
    assert width(fine) < width(coarse)
