"""Chain-complex machinery: validation, (co)homology, systoles, expansion.

Expected values are pinned by the int-mask oracle (brute-force enumeration)
or derived by hand for the tiny fixed complexes.
"""

from __future__ import annotations

from fractions import Fraction
from math import inf

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles
from qsurgery import f2
from qsurgery.homology import (
    ChainComplex,
    TooLarge,
    cohomology_basis,
    cohomology_dim,
    cosystole,
    dual,
    homology_basis,
    homology_dim,
    require_valid,
    systole,
    systole_witness,
    systolic_expansion,
    validate,
)


def from_masks(masks, cols):
    dense = np.array([oracles.mask_to_vec(m, cols) for m in masks], dtype=np.uint8)
    return f2.BitMatrix.from_dense(dense.reshape(len(masks), cols))


def repetition_complex():
    # three bits, two adjacent-pair checks at the bottom
    return ChainComplex((2, 3), (f2.BitMatrix.from_dense([[1, 1, 0], [0, 1, 1]]),))


@st.composite
def one_boundary_complexes(draw, max_dim=9):
    d0 = draw(st.integers(1, max_dim))
    d1 = draw(st.integers(1, max_dim))
    masks = draw(st.lists(st.integers(0, (1 << d1) - 1), min_size=d0, max_size=d0))
    return ChainComplex((d0, d1), (from_masks(masks, d1),))


@st.composite
def two_boundary_complexes(draw, max_dim=8):
    c = draw(one_boundary_complexes(max_dim=max_dim))
    b1 = c.boundaries[0]
    kern = f2.kernel_basis(b1)
    d2 = draw(st.integers(0, max_dim))
    cols = []
    for _ in range(d2):
        pick = draw(st.integers(0, (1 << len(kern)) - 1)) if kern else 0
        v = f2.BitVector.zeros(c.degrees[1])
        for j, kv in enumerate(kern):
            if (pick >> j) & 1:
                v = v ^ kv
        cols.append(v.to_dense())
    b2 = f2.BitMatrix.from_dense(
        np.array(cols, dtype=np.uint8).reshape(d2, c.degrees[1]).T
        if d2
        else np.zeros((c.degrees[1], 0), np.uint8)
    )
    return ChainComplex((c.degrees[0], c.degrees[1], d2), (b1, b2))


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def test_validate_repetition():
    assert validate(repetition_complex())


def test_validate_rejects_nonzero_composition():
    # boundary 2->1 hits a non-cycle column
    b1 = f2.BitMatrix.from_dense([[1, 1, 0], [0, 1, 1]])
    b2 = f2.BitMatrix.from_dense([[1], [0], [0]])
    c = ChainComplex((2, 3, 1), (b1, b2))
    assert not validate(c)
    with pytest.raises(ValueError, match="composition 2->1->0"):
        require_valid(c)


def test_validate_rejects_shape_mismatch():
    c = ChainComplex((2, 4), (f2.BitMatrix.from_dense([[1, 1, 0], [0, 1, 1]]),))
    assert not validate(c)
    with pytest.raises(ValueError, match="shape"):
        require_valid(c)


@given(two_boundary_complexes())
def test_generated_complexes_are_valid(c):
    assert validate(c)
    # oracle nilpotency: every column of the upper boundary is annihilated
    b1 = oracles.dense_to_masks(c.boundaries[0].to_dense())
    for j in range(c.degrees[2]):
        col = oracles.vec_to_mask(c.boundaries[1].to_dense()[:, j])
        assert oracles.matvec_int(b1, col) == 0


def test_dual_is_involution():
    c = ChainComplex(
        (2, 3, 1),
        (
            f2.BitMatrix.from_dense([[1, 1, 0], [0, 1, 1]]),
            f2.BitMatrix.from_dense([[1], [1], [1]]),
        ),
    )
    assert validate(c) and validate(dual(c))
    assert dual(dual(c)) == c


# ---------------------------------------------------------------------------
# homology / cohomology
# ---------------------------------------------------------------------------


def test_repetition_homology_basis():
    hb = homology_basis(repetition_complex(), 1)
    assert hb.dimension == 1
    # no boundaries from above, so the representative is exactly all-ones
    assert hb.representatives[0] == f2.BitVector.from_bits([1, 1, 1])
    assert hb.boundary_space.rows == 0


def test_identity_complex_has_no_homology():
    c = ChainComplex((4, 4), (f2.BitMatrix.identity(4),))
    assert homology_dim(c, 1) == 0 == homology_dim(c, 0)
    assert cohomology_dim(c, 1) == 0
    assert homology_basis(c, 1).dimension == 0


@given(two_boundary_complexes())
def test_homology_dims_match_rank_oracle(c):
    b1_masks = oracles.dense_to_masks(c.boundaries[0].to_dense())
    b2_masks = oracles.dense_to_masks(c.boundaries[1].to_dense())
    expect_mid = oracles.homology_dim_int(b1_masks, b2_masks, c.degrees[1])
    assert homology_dim(c, 1) == expect_mid
    assert homology_basis(c, 1).dimension == expect_mid
    # bottom: everything is a cycle
    expect_bot = c.degrees[0] - oracles.rank_int(b1_masks)
    assert homology_dim(c, 0) == expect_bot
    # top: kernel of the upper boundary
    expect_top = c.degrees[2] - oracles.rank_int(b2_masks)
    assert homology_dim(c, 2) == expect_top


@given(two_boundary_complexes())
def test_field_duality_of_dimensions(c):
    for i in range(3):
        assert homology_dim(c, i) == cohomology_dim(c, i)


@given(two_boundary_complexes(max_dim=6))
def test_representatives_are_cycles_independent_mod_boundaries(c):
    for i in (0, 1, 2):
        hb = homology_basis(c, i)
        out = c.boundary_out(i)
        b_masks = oracles.dense_to_masks(hb.boundary_space.to_dense())
        base_rank = oracles.rank_int(b_masks)
        grown = list(b_masks)
        for rep in hb.representatives:
            assert (out @ rep).is_zero()
            grown.append(oracles.vec_to_mask(rep.to_dense()))
        # independence modulo the boundary space
        assert oracles.rank_int(grown) == base_rank + hb.dimension
        # representatives + boundaries span the full cycle space
        cyc_rank = oracles.rank_int(
            oracles.dense_to_masks(hb.cycle_space.to_dense())
        )
        assert base_rank + hb.dimension == cyc_rank


def test_cohomology_basis_lives_in_original_coordinates():
    c = repetition_complex()
    hb = cohomology_basis(c, 1)
    assert hb.degree == 1
    assert hb.dimension == 1
    assert all(v.n == 3 for v in hb.representatives)


# ---------------------------------------------------------------------------
# systole
# ---------------------------------------------------------------------------


def test_repetition_systole_is_three():
    assert systole(repetition_complex(), 1, 3) == 3


def test_systole_witness_contract():
    c = repetition_complex()
    wt, v = systole_witness(c, 1, 3)
    assert wt == 3 and v == f2.BitVector.from_bits([1, 1, 1])


def test_systole_undefined_when_trivial():
    c = ChainComplex((4, 4), (f2.BitMatrix.identity(4),))
    with pytest.raises(ValueError, match="systole"):
        systole(c, 1, 4)


def test_systole_exceeded_cutoff():
    assert systole(repetition_complex(), 1, 2) is f2.EXCEEDED


@settings(max_examples=60)
@given(two_boundary_complexes(max_dim=6))
def test_systole_matches_bruteforce(c):
    assume(homology_dim(c, 1) > 0)
    out_masks = oracles.dense_to_masks(c.boundaries[0].to_dense())
    in_t_masks = oracles.dense_to_masks(c.boundaries[1].T.to_dense())
    expect = oracles.code_distance_int(out_masks, in_t_masks, c.degrees[1])
    got, wit = systole_witness(c, 1, c.degrees[1])
    assert got == expect
    assert wit.weight() == expect
    assert (c.boundaries[0] @ wit).is_zero()
    assert not f2.in_rowspace(c.boundaries[1].T, wit)


@settings(max_examples=40)
@given(two_boundary_complexes(max_dim=6))
def test_cosystole_matches_bruteforce(c):
    assume(cohomology_dim(c, 1) > 0)
    # cocycles: orthogonal to columns of the map in from above; trivial ones
    # are spanned by the rows of the map down
    in_masks = oracles.dense_to_masks(c.boundaries[1].T.to_dense())
    out_masks = oracles.dense_to_masks(c.boundaries[0].to_dense())
    expect = oracles.code_distance_int(in_masks, out_masks, c.degrees[1])
    assert cosystole(c, 1, c.degrees[1]) == expect


# ---------------------------------------------------------------------------
# systolic expansion
# ---------------------------------------------------------------------------


def test_expansion_single_bit():
    c = ChainComplex((1, 1), (f2.BitMatrix.from_dense([[1]]),))
    eps, wit = systolic_expansion(c, 1)
    assert eps == Fraction(1)
    assert wit == f2.BitVector.from_bits([1])


def test_expansion_repetition():
    eps, wit = systolic_expansion(repetition_complex(), 1)
    assert eps == Fraction(1)
    assert wit is not None and not (repetition_complex().boundaries[0] @ wit).is_zero()


def test_expansion_path_graph_length_six():
    # 7 vertices, 6 path edges: the full path has boundary weight 2 but sits
    # at distance 6 from the (trivial) cycle space
    edges = [(i, i + 1) for i in range(6)]
    dense = np.zeros((7, 6), dtype=np.uint8)
    for j, (a, b) in enumerate(edges):
        dense[a, j] = dense[b, j] = 1
    c = ChainComplex((7, 6), (f2.BitMatrix.from_dense(dense),))
    eps, wit = systolic_expansion(c, 1)
    assert eps == Fraction(1, 3)
    assert eps < 1
    assert wit == f2.BitVector.from_bits([1] * 6)


def test_expansion_zero_boundary_is_infinite():
    c = ChainComplex((2, 3), (f2.BitMatrix.zeros(2, 3),))
    eps, wit = systolic_expansion(c, 1)
    assert eps == inf and wit is None


def test_expansion_too_large():
    c = ChainComplex((1, 30), (f2.BitMatrix.from_dense(np.ones((1, 30), np.uint8)),))
    with pytest.raises(TooLarge):
        systolic_expansion(c, 1, max_dim=24)


@settings(max_examples=60)
@given(one_boundary_complexes(max_dim=7))
def test_expansion_bound_and_witness(c):
    b_masks = oracles.dense_to_masks(c.boundaries[0].to_dense())
    d1 = c.degrees[1]
    kernel = oracles.kernel_int(b_masks, d1)
    assume(len(kernel) < (1 << d1))  # at least one f outside the cycle space
    eps, wit = systolic_expansion(c, 1)
    assert isinstance(eps, Fraction)
    achieved = False
    for fm in range(1 << d1):
        if fm in kernel:
            continue
        s = oracles.matvec_int(b_masks, fm)
        dist = min((fm ^ z).bit_count() for z in kernel)
        ratio = Fraction(s.bit_count(), dist)
        assert ratio >= eps
        achieved = achieved or ratio == eps
    assert achieved
    wm = oracles.vec_to_mask(wit.to_dense())
    assert wm not in kernel
    s = oracles.matvec_int(b_masks, wm)
    dist = min((wm ^ z).bit_count() for z in kernel)
    assert Fraction(s.bit_count(), dist) == eps
