"""Binary encoding of refinement trees.

Layout: ``MAGIC`` (4 bytes), version (1 byte), header length (4 bytes, big
endian), a JSON header, then the bit-packed depth-first payload (MSB first).
For each node the payload holds one bit (0 leaf, 1 internal) followed, for
internal nodes, by the split code: nothing for 1D and fixed isotropic splits,
one bit for the rectangle axis, two bits for the triangle vertex.
"""
from __future__ import annotations

import hashlib
import json
import struct
from typing import List

from .geometry import (
    Element,
    Interval1D,
    RectElement,
    TriElement,
    bisect_triangle,
    iso_split,
    iso_vertex,
    split_interval,
    split_rect,
)
from .refine import SPLIT_CODE_BITS, PartitionTree, RefineConfig

MAGIC = b"AFTB"
VERSION = 1


class BitstreamError(ValueError):
    def __init__(self, message: str, bit_offset: int):
        super().__init__(f"{message} (bit offset {bit_offset})")
        self.bit_offset = bit_offset


def element_to_json(el: Element):
    if isinstance(el, Interval1D):
        return {"interval": [el.lo, el.hi]}
    if isinstance(el, RectElement):
        return {"rect": [el.ix.lo, el.ix.hi, el.iy.lo, el.iy.hi]}
    return {"tri": [list(v) for v in el.vertices], "newest": el.newest_vertex_index, "generation": el.generation}


def element_from_json(d) -> Element:
    if "interval" in d:
        lo, hi = d["interval"]
        return Interval1D(float(lo), float(hi), (0, 0))
    if "rect" in d:
        return RectElement.from_bounds(*map(float, d["rect"]))
    if "tri" in d:
        verts = tuple((float(x), float(y)) for x, y in d["tri"])
        return TriElement(verts, d.get("newest"), int(d.get("generation", 0)))
    raise ValueError(f"unknown element record {d!r}")


class _BitWriter:
    def __init__(self):
        self.bits: List[int] = []

    def write(self, value: int, width: int):
        for k in range(width - 1, -1, -1):
            self.bits.append((value >> k) & 1)

    def to_bytes(self) -> bytes:
        out = bytearray((len(self.bits) + 7) // 8)
        for i, b in enumerate(self.bits):
            if b:
                out[i >> 3] |= 0x80 >> (i & 7)
        return bytes(out)


class _BitReader:
    def __init__(self, data: bytes, nbits: int):
        self.data = data
        self.nbits = nbits
        self.pos = 0

    def read(self, width: int) -> int:
        if self.pos + width > self.nbits:
            raise BitstreamError("truncated payload", self.pos)
        v = 0
        for _ in range(width):
            byte = self.data[self.pos >> 3]
            v = (v << 1) | ((byte >> (7 - (self.pos & 7))) & 1)
            self.pos += 1
        return v


def payload_bits(tree: PartitionTree) -> List[int]:
    width = SPLIT_CODE_BITS[tree.cfg.strategy]
    w = _BitWriter()
    stack = list(reversed(tree.roots))
    while stack:
        node = tree.nodes[stack.pop()]
        if node.is_leaf:
            w.write(0, 1)
            continue
        w.write(1, 1)
        if width:
            w.write(int(node.split), width)
        stack.extend(reversed(node.children))
    return w.bits


def encode_tree(tree: PartitionTree) -> bytes:
    w = _BitWriter()
    w.bits = payload_bits(tree)
    header = {
        "strategy": tree.cfg.strategy,
        "degree": tree.cfg.degree,
        "roots": [element_to_json(tree.nodes[r].element) for r in tree.roots],
        "nbits": len(w.bits),
    }
    hb = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    return MAGIC + bytes([VERSION]) + struct.pack(">I", len(hb)) + hb + w.to_bytes()


def _children(strategy: str, el: Element, code):
    if strategy == "greedy_1d":
        return split_interval(el)
    if strategy == "iso_quad":
        return iso_split(el, "quad")
    if strategy.startswith("aniso_rect"):
        return split_rect(el, code)
    return bisect_triangle(el, code)


def decode_tree(data: bytes) -> PartitionTree:
    """Rebuild the tree geometry; the result carries no fits (errors read 0)."""
    if len(data) < 9 or data[:4] != MAGIC:
        raise BitstreamError("bad magic", 0)
    if data[4] != VERSION:
        raise BitstreamError(f"unsupported version {data[4]}", 32)
    (hlen,) = struct.unpack(">I", data[5:9])
    if len(data) < 9 + hlen:
        raise BitstreamError(f"truncated header: expected {hlen} bytes, got {len(data) - 9}", 72)
    try:
        header = json.loads(data[9:9 + hlen].decode())
        strategy = header["strategy"]
        roots = [element_from_json(r) for r in header["roots"]]
        nbits = int(header["nbits"])
        cfg = RefineConfig(degree=int(header["degree"]), strategy=strategy,
                           decision_norm="lp", max_N=2**62)
    except (ValueError, KeyError, TypeError) as exc:
        raise BitstreamError(f"malformed header: {exc}", 72) from None
    payload = data[9 + hlen:]
    if len(payload) * 8 < nbits:
        raise BitstreamError(f"truncated payload: header declares {nbits} bits, stream has {len(payload) * 8}",
                             len(payload) * 8)
    width = SPLIT_CODE_BITS[strategy]
    reader = _BitReader(payload, nbits)
    tree = PartitionTree(roots, cfg, None)
    stack = list(reversed(tree.roots))
    while stack:
        idx = stack.pop()
        if reader.read(1) == 0:
            continue
        at = reader.pos
        code = reader.read(width) if width else None
        if width == 2 and code == 3:
            raise BitstreamError("invalid triangle split code 3", at)
        if strategy in ("iso_newest_vertex", "iso_longest_edge"):
            code = iso_vertex(tree.nodes[idx].element, strategy[4:])
        kids = _children(strategy, tree.nodes[idx].element, code)
        kind = "iso" if width == 0 else "greedy"
        new = tree.split(idx, code, kind, kids)
        stack.extend(reversed(new))
    if reader.pos != nbits:
        raise BitstreamError(f"{nbits - reader.pos} trailing bits", reader.pos)
    return tree


def tree_hash(tree: PartitionTree) -> str:
    """sha256 of the encoded bitstream; equal trees give equal hashes."""
    return hashlib.sha256(encode_tree(tree)).hexdigest()


def leaf_geometry(tree: PartitionTree):
    """Leaves in depth-first order, as hashable vertex tuples."""
    out = []
    stack = list(reversed(tree.roots))
    while stack:
        node = tree.nodes[stack.pop()]
        if node.is_leaf:
            el = node.element
            if isinstance(el, Interval1D):
                out.append((el.lo, el.hi))
            elif isinstance(el, RectElement):
                out.append((el.ix.lo, el.ix.hi, el.iy.lo, el.iy.hi))
            else:
                out.append(el.vertices)
        else:
            stack.extend(reversed(node.children))
    return out
