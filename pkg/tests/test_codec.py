import math

import pytest

from anisofit import codec as C
from anisofit import refine as R
from anisofit import targets as T


def run(strategy, N, f=None, m=None):
    f = f or (T.power_alpha(0.5) if strategy == "greedy_1d" else T.product_sine())
    m = m or (2 if "tri" in strategy or "newest" in strategy or "longest" in strategy else 1)
    tree, _ = R.run_to_N(f, R.RefineConfig(strategy=strategy, degree=m, p=2.0, max_N=N))
    return tree


def test_single_leaf_payload():
    tree = run("aniso_rect", 1)
    assert C.payload_bits(tree) == [0]
    assert C.decode_tree(C.encode_tree(tree)).N == 1


@pytest.mark.parametrize("N", [1, 2, 17, 300])
def test_1d_payload_length(N):
    assert len(C.payload_bits(run("greedy_1d", N))) == 2 * N - 1


def test_payload_lengths_per_strategy():
    # single root: 2N - 1 structure bits plus the split codes
    assert len(C.payload_bits(run("aniso_rect", 60))) == (2 * 60 - 1) + 59
    # two roots, N leaves: 2N - 2 structure bits, N - 2 splits of 2 bits
    assert len(C.payload_bits(run("aniso_tri", 60))) == (2 * 60 - 2) + 2 * 58
    assert len(C.payload_bits(run("iso_newest_vertex", 60))) == 2 * 60 - 2


@pytest.mark.parametrize("strategy", ["greedy_1d", "iso_quad", "iso_newest_vertex", "iso_longest_edge",
                                      "aniso_rect", "aniso_rect_modified", "aniso_tri", "aniso_tri_modified"])
def test_round_trip(strategy):
    tree = run(strategy, 80)
    back = C.decode_tree(C.encode_tree(tree))
    assert C.leaf_geometry(back) == C.leaf_geometry(tree)
    assert C.encode_tree(back) == C.encode_tree(tree)
    assert back.cfg.strategy == strategy and back.cfg.degree == tree.cfg.degree


def test_truncated_stream():
    data = C.encode_tree(run("aniso_tri", 40))
    with pytest.raises(C.BitstreamError) as err:
        C.decode_tree(data[:-4])
    assert err.value.bit_offset > 0
    assert "truncated" in str(err.value)


def test_invalid_split_code():
    tree = run("aniso_tri", 3)
    data = bytearray(C.encode_tree(tree))
    bits = C.payload_bits(tree)
    # the first internal node's code sits right after its flag bit
    first_internal = bits.index(1)
    payload_start = len(data) - (len(bits) + 7) // 8
    for k in (first_internal + 1, first_internal + 2):
        data[payload_start + k // 8] |= 0x80 >> (k % 8)
    with pytest.raises(C.BitstreamError, match="split code") as err:
        C.decode_tree(bytes(data))
    assert err.value.bit_offset == first_internal + 1


def test_bad_magic_and_version():
    with pytest.raises(C.BitstreamError, match="magic"):
        C.decode_tree(b"XXXX\x01\x00\x00\x00\x00")
    data = bytearray(C.encode_tree(run("aniso_rect", 5)))
    data[4] = 9
    with pytest.raises(C.BitstreamError, match="version"):
        C.decode_tree(bytes(data))


def test_hash_determinism():
    a = C.tree_hash(run("aniso_tri_modified", 150, T.sharp_ring(0.2)))
    b = C.tree_hash(run("aniso_tri_modified", 150, T.sharp_ring(0.2)))
    c = C.tree_hash(run("aniso_tri_modified", 151, T.sharp_ring(0.2)))
    assert a == b != c
