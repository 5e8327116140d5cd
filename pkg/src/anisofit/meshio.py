"""File formats: PGM rasters, the textual mesh document, and SVG rendering."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .geometry import Interval1D, RectElement, TriElement
from .targets import RasterImage

MESH_MAGIC = "anisofit-mesh 1"


class FormatError(ValueError):
    """Malformed input file."""


# --- PGM -------------------------------------------------------------------------

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header_tokens(data: bytes, count: int):
    pos = 0
    out = []
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError(f"malformed PGM header: expected {count} fields, found {len(out)}")
        out.append(m.group(1))
        pos = m.end()
    return out, pos


def parse_pgm(data: bytes) -> RasterImage:
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"unsupported PGM magic {magic!r}; expected b'P2' or b'P5'")
    toks, pos = _header_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in toks[1:])
    except ValueError:
        raise FormatError(f"malformed PGM header: {b' '.join(toks)!r}") from None
    if width <= 0 or height <= 0 or not 0 < maxval <= 65535:
        raise FormatError(f"malformed PGM header: width={width} height={height} maxval={maxval}")
    n = width * height
    if magic == b"P5":
        body = data[pos + 1:]  # single whitespace byte after maxval
        bpp = 1 if maxval < 256 else 2
        need = n * bpp
        if len(body) < need:
            raise FormatError(f"truncated PGM payload: expected {need} bytes, got {len(body)}")
        dtype = np.uint8 if bpp == 1 else np.dtype(">u2")
        values = np.frombuffer(body[:need], dtype=dtype).astype(float)
    else:
        words = data[pos:].split()
        if len(words) < n:
            raise FormatError(f"truncated PGM payload: expected {n} samples, got {len(words)}")
        try:
            values = np.array([int(w) for w in words[:n]], dtype=float)
        except ValueError:
            raise FormatError("non-integer sample in P2 payload") from None
    if values.max(initial=0) > maxval:
        raise FormatError(f"sample exceeds maxval {maxval}")
    return RasterImage(width, height, values / maxval)


def read_pgm(path) -> RasterImage:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def pgm_bytes(img: RasterImage, maxval: int = 255, binary: bool = True) -> bytes:
    q = np.clip(np.rint(img.samples * maxval), 0, maxval).astype(int)
    head = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n{maxval}\n".encode()
    if not binary:
        rows = q.reshape(img.height, img.width)
        return head + "\n".join(" ".join(map(str, r)) for r in rows).encode() + b"\n"
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    return head + q.astype(dtype).tobytes()


def write_pgm(path, img: RasterImage, maxval: int = 255, binary: bool = True):
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(img, maxval, binary))


# --- mesh document -------------------------------------------------------------------


@dataclass
class MeshLeaf:
    kind: str  # interval | rect | tri
    coords: Tuple[float, ...]
    error: float
    generation: int
    flag: str  # root | iso | greedy | safety
    coefficients: Tuple[float, ...] = ()

    def element(self):
        if self.kind == "interval":
            return Interval1D(*self.coords)
        if self.kind == "rect":
            return RectElement.from_bounds(*self.coords)
        c = self.coords
        return TriElement(((c[0], c[1]), (c[2], c[3]), (c[4], c[5])))

    def polygon(self) -> List[Tuple[float, float]]:
        c = self.coords
        if self.kind == "rect":
            x0, x1, y0, y1 = c
            return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        if self.kind == "tri":
            return [(c[0], c[1]), (c[2], c[3]), (c[4], c[5])]
        raise ValueError("intervals have no polygon")


@dataclass
class MeshDocument:
    metadata: Dict[str, str] = field(default_factory=dict)
    leaves: List[MeshLeaf] = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.leaves)

    def bounds(self):
        pts = np.array([p for leaf in self.leaves for p in leaf.polygon()])
        return pts[:, 0].min(), pts[:, 0].max(), pts[:, 1].min(), pts[:, 1].max()


def _fmt(v: float) -> str:
    return repr(float(v))


def _leaf_coords(el) -> Tuple[str, Tuple[float, ...]]:
    if isinstance(el, Interval1D):
        return "interval", (el.lo, el.hi)
    if isinstance(el, RectElement):
        return "rect", (el.ix.lo, el.ix.hi, el.iy.lo, el.iy.hi)
    return "tri", tuple(c for v in el.vertices for c in v)


def mesh_from_tree(tree, target_spec: str = "", extra: Optional[Dict[str, str]] = None) -> MeshDocument:
    from .shape import kappa_file_hash

    meta = {
        "strategy": tree.cfg.strategy,
        "target": target_spec,
        "config": json.dumps(tree.cfg.as_dict(), sort_keys=True, separators=(",", ":")),
        "kappa_hash": kappa_file_hash(),
    }
    if extra:
        meta.update(extra)
    leaves = []
    for node in tree.leaf_nodes():
        kind, coords = _leaf_coords(node.element)
        coefs = tuple(float(c) for c in node.fit.coefficients) if node.fit is not None else ()
        leaves.append(MeshLeaf(kind, coords, node.error, node.generation, node.kind, coefs))
    return MeshDocument(meta, leaves)


def format_mesh(doc: MeshDocument) -> str:
    lines = [MESH_MAGIC]
    for k, v in doc.metadata.items():
        if any(ch.isspace() for ch in k) or "\n" in str(v):
            raise ValueError(f"metadata {k!r} cannot be written on one line")
        lines.append(f"meta {k} {v}")
    lines.append(f"leaves {doc.N}")
    for leaf in doc.leaves:
        parts = ["leaf", leaf.kind, *map(_fmt, leaf.coords), _fmt(leaf.error), str(leaf.generation), leaf.flag,
                 str(len(leaf.coefficients)), *map(_fmt, leaf.coefficients)]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


_NCOORDS = {"interval": 2, "rect": 4, "tri": 6}


def parse_mesh(text: str) -> MeshDocument:
    lines = text.splitlines()
    if not lines or lines[0] != MESH_MAGIC:
        raise FormatError(f"not a mesh document: first line must be {MESH_MAGIC!r}")
    doc = MeshDocument()
    expected = None
    for lineno, line in enumerate(lines[1:], 2):
        if line.startswith("meta "):
            _, key, *rest = line.split(" ", 2)
            doc.metadata[key] = rest[0] if rest else ""
        elif line.startswith("leaves "):
            expected = int(line.split()[1])
        elif line.startswith("leaf "):
            w = line.split()
            try:
                kind = w[1]
                nc = _NCOORDS[kind]
                coords = tuple(float(x) for x in w[2:2 + nc])
                err = float(w[2 + nc])
                gen = int(w[3 + nc])
                flag = w[4 + nc]
                k = int(w[5 + nc])
                coefs = tuple(float(x) for x in w[6 + nc:6 + nc + k])
                if len(coords) != nc or len(coefs) != k or len(w) != 6 + nc + k:
                    raise IndexError
            except (KeyError, IndexError, ValueError):
                raise FormatError(f"mesh line {lineno}: malformed leaf record") from None
            doc.leaves.append(MeshLeaf(kind, coords, err, gen, flag, coefs))
        elif line.strip():
            raise FormatError(f"mesh line {lineno}: unknown record {line.split()[0]!r}")
    if expected is not None and expected != doc.N:
        raise FormatError(f"mesh declares {expected} leaves but holds {doc.N}")
    return doc


def read_mesh(path) -> MeshDocument:
    with open(path) as fh:
        return parse_mesh(fh.read())


def write_mesh(path, doc: MeshDocument):
    with open(path, "w") as fh:
        fh.write(format_mesh(doc))


# --- SVG -----------------------------------------------------------------------------


def write_svg(doc: MeshDocument, coloring: str = "none", Q=None, threshold: float = 2.0, p: float = 2.0,
              size: int = 512) -> str:
    """One polygon per leaf; returns the SVG document text.

    ``coloring``: none, value (grey level from the fit's mean value), or
    sigma_threshold (white when sigma_Q(T)_p <= threshold, grey otherwise).
    """
    if not doc.leaves or doc.leaves[0].kind == "interval":
        raise ValueError("SVG rendering needs a non-empty 2D mesh")
    x0, x1, y0, y1 = doc.bounds()
    span = max(x1 - x0, y1 - y0) or 1.0
    s = size / span
    W, H = (x1 - x0) * s, (y1 - y0) * s

    fills = _fills(doc, coloring, Q, threshold, p)
    dmin = min(_diameter(leaf.polygon()) for leaf in doc.leaves) * s
    stroke = min(2.0, max(0.01, 0.05 * dmin))

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W:.6g}" height="{H:.6g}" '
        f'viewBox="0 0 {W:.6g} {H:.6g}">',
        f'<g stroke="black" stroke-width="{stroke:.4g}" stroke-linejoin="round">',
    ]
    for leaf, fill in zip(doc.leaves, fills):
        pts = " ".join(f"{(x - x0) * s:.6g},{(y1 - y) * s:.6g}" for x, y in leaf.polygon())
        out.append(f'<polygon points="{pts}" fill="{fill}"/>')
    out += ["</g>", "</svg>"]
    return "\n".join(out) + "\n"


def _diameter(poly) -> float:
    pts = np.asarray(poly)
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((d**2).sum(-1)).max())


def _fills(doc: MeshDocument, coloring: str, Q, threshold: float, p: float) -> List[str]:
    n = doc.N
    if coloring == "none":
        return ["none"] * n
    if coloring == "value":
        means = np.array([leaf.coefficients[0] if leaf.coefficients else 0.0 for leaf in doc.leaves])
        lo, hi = means.min(), means.max()
        t = (means - lo) / (hi - lo) if hi > lo else np.zeros(n)
        return [f"rgb({g},{g},{g})" for g in np.rint(255 * t).astype(int)]
    if coloring == "sigma_threshold":
        if Q is None:
            raise ValueError("sigma_threshold coloring needs a quadratic form")
        if math.isinf(threshold) and threshold > 0:
            return ["white"] * n
        from .shape import load_kappa, sigma_adaptation

        kappa = load_kappa()
        out = []
        for leaf in doc.leaves:
            if leaf.kind != "tri":
                raise ValueError("sigma_threshold coloring needs triangles")
            sig = sigma_adaptation(Q, leaf.element(), p, kappa)
            out.append("white" if sig <= threshold else "grey")
        return out
    raise ValueError(f"unknown coloring {coloring!r}; expected none, value or sigma_threshold")
