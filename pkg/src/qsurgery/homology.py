"""Chain complexes over GF(2): homology, cohomology, systoles, expansion.

A complex is stored bottom-up: ``degrees[i]`` is the dimension of the
degree-``i`` space and ``boundaries[i]`` maps degree ``i+1`` chains down to
degree ``i`` (shape ``degrees[i] × degrees[i+1]``).  External inputs that
index boundary maps top-down are re-indexed on ingestion by the file-format
layer, so everything in memory follows this one convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import inf, lcm

import numpy as np

from . import f2
from .f2 import BitMatrix, BitVector, EXCEEDED, Exceeded

__all__ = [
    "ChainComplex",
    "HomologyBasis",
    "TooLarge",
    "validate",
    "require_valid",
    "dual",
    "homology_basis",
    "cohomology_basis",
    "homology_dim",
    "cohomology_dim",
    "systole",
    "cosystole",
    "systolic_expansion",
]


class TooLarge(Exception):
    """Raised when an exhaustive certification is infeasible at this size."""


@dataclass(frozen=True)
class ChainComplex:
    """A bounded chain complex of GF(2) vector spaces.

    ``boundaries[i]`` is ∂ out of degree ``i+1``; nilpotency of consecutive
    maps is checked by :func:`validate`, not enforced at construction (some
    intermediate assemblies are deliberately built invalid and then tested).
    """

    degrees: tuple[int, ...]
    boundaries: tuple[BitMatrix, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        object.__setattr__(self, "boundaries", tuple(self.boundaries))

    @property
    def top(self) -> int:
        return len(self.degrees) - 1

    def dim(self, i: int) -> int:
        """Dimension of the degree-i space; 0 outside the stored range."""
        return self.degrees[i] if 0 <= i <= self.top else 0

    def boundary_out(self, i: int) -> BitMatrix:
        """∂ out of degree ``i``; zero maps of the right shape out of range."""
        if 1 <= i <= self.top:
            return self.boundaries[i - 1]
        return BitMatrix.zeros(self.dim(i - 1), self.dim(i))

    def boundary_in(self, i: int) -> BitMatrix:
        """∂ into degree ``i`` from above; zero maps of the right shape out of range."""
        if 0 <= i < self.top:
            return self.boundaries[i]
        return BitMatrix.zeros(self.dim(i), self.dim(i + 1))


def _invalid_reason(c: ChainComplex) -> str | None:
    if len(c.degrees) == 0:
        return "complex has no degrees"
    if len(c.boundaries) != len(c.degrees) - 1:
        return (
            f"expected {len(c.degrees) - 1} boundary maps for "
            f"{len(c.degrees)} degrees, got {len(c.boundaries)}"
        )
    for i, b in enumerate(c.boundaries):
        want = (c.degrees[i], c.degrees[i + 1])
        if b.shape != want:
            return f"boundary {i + 1}->{i} has shape {b.shape}, expected {want}"
    for i in range(len(c.boundaries) - 1):
        if not (c.boundaries[i] @ c.boundaries[i + 1]).is_zero():
            return f"boundary composition {i + 2}->{i + 1}->{i} is nonzero"
    return None


def validate(c: ChainComplex) -> bool:
    """True iff shapes line up and consecutive boundaries compose to zero."""
    return _invalid_reason(c) is None


def require_valid(c: ChainComplex) -> None:
    reason = _invalid_reason(c)
    if reason is not None:
        raise ValueError(f"invalid chain complex: {reason}")


def dual(c: ChainComplex) -> ChainComplex:
    """The cochain complex, re-graded so it is again a chain complex.

    Degree ``i`` of the input becomes degree ``top − i``; every boundary map
    is transposed.  (Co)homology of the input at degree ``i`` is homology of
    the dual at degree ``top − i``, in the same coordinates.
    """
    top = c.top
    degrees = tuple(c.degrees[top - j] for j in range(top + 1))
    boundaries = tuple(c.boundaries[top - j - 1].T for j in range(top))
    return ChainComplex(degrees, boundaries)


@dataclass(frozen=True)
class HomologyBasis:
    """A homology group presented by cycle representatives.

    ``representatives`` extend a basis of the boundary space to one of the
    cycle space; their count is the homology dimension.
    """

    degree: int
    representatives: tuple[BitVector, ...]
    cycle_space: BitMatrix
    boundary_space: BitMatrix

    @property
    def dimension(self) -> int:
        return len(self.representatives)


class _Reducer:
    """Incremental row reduction for extending bases."""

    def __init__(self, nbits: int):
        self.nbits = nbits
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []

    def _reduce(self, words: np.ndarray) -> np.ndarray:
        one = np.uint64(1)
        for p, row in zip(self.pivots, self.rows):
            if (words[p >> 6] >> np.uint64(p & 63)) & one:
                words = words ^ row
        return words

    def add(self, v: BitVector) -> bool:
        """Add v to the span; False when it was already dependent."""
        red = self._reduce(v.words.copy())
        if not red.any():
            return False
        for w in range(red.shape[0]):
            if red[w]:
                bit = int(red[w] & np.uint64(~red[w] + np.uint64(1)))  # lowest set bit
                self.pivots.append(w * 64 + bit.bit_length() - 1)
                break
        self.rows.append(red)
        return True


def _space_bases(c: ChainComplex, i: int) -> tuple[list[BitVector], BitMatrix]:
    """(cycle basis, boundary rowspace) at degree i of a valid complex."""
    out = c.boundary_out(i)
    if out.rows == 0:
        cycles = [BitVector.from_support(c.dim(i), [j]) for j in range(c.dim(i))]
    else:
        cycles = f2.kernel_basis(out)
    b_in = c.boundary_in(i)
    boundary = f2.row_basis(b_in.T) if b_in.cols else BitMatrix.zeros(0, c.dim(i))
    return cycles, boundary


def homology_basis(c: ChainComplex, i: int) -> HomologyBasis:
    """Representatives of H_i = ker ∂ / im ∂, extending the boundary basis.

    Deterministic: cycle basis vectors are considered in the fixed kernel
    order, and each is kept iff independent of the boundary space plus the
    representatives already kept.
    """
    require_valid(c)
    if not 0 <= i <= c.top:
        raise ValueError(f"degree {i} outside complex range 0..{c.top}")
    cycles, boundary = _space_bases(c, i)
    red = _Reducer(c.dim(i))
    for r in range(boundary.rows):
        red.add(boundary.row(r))
    reps = [z for z in cycles if red.add(z)]
    cyc_mat = BitMatrix.from_rows(cycles, cols=c.dim(i))
    return HomologyBasis(i, tuple(reps), cyc_mat, boundary)


def cohomology_basis(c: ChainComplex, i: int) -> HomologyBasis:
    """Representatives of H^i, computed as homology of the dual complex.

    The returned vectors live in the same degree-``i`` coordinates (only the
    grading flips), so the ``degree`` field is restored to ``i``.
    """
    hb = homology_basis(dual(c), c.top - i)
    return HomologyBasis(i, hb.representatives, hb.cycle_space, hb.boundary_space)


def homology_dim(c: ChainComplex, i: int) -> int:
    """dim H_i from ranks alone (no basis construction)."""
    require_valid(c)
    out = c.boundary_out(i)
    rank_out = f2.rank(out) if 1 <= i <= c.top else 0
    b_in = c.boundary_in(i)
    rank_in = f2.rank(b_in) if 0 <= i < c.top else 0
    return c.dim(i) - rank_out - rank_in


def cohomology_dim(c: ChainComplex, i: int) -> int:
    return homology_dim(dual(c), c.top - i)


def systole(c: ChainComplex, i: int, w_max: int) -> int | Exceeded:
    """Minimum weight of a cycle at degree i that is not a boundary.

    Weight classes are enumerated ascending; membership in the cycle space
    is a syndrome check and non-membership in the boundary space a rank
    reduction, both batched over packed candidate blocks.
    """
    wt, _ = systole_witness(c, i, w_max)
    return wt


def systole_witness(c: ChainComplex, i: int, w_max: int) -> tuple[int | Exceeded, BitVector | None]:
    require_valid(c)
    if homology_dim(c, i) == 0:
        raise ValueError(f"H_{i} is trivial; systole undefined")
    out = c.boundary_out(i)
    b_rref, b_pivots = f2.rref(c.boundary_in(i).T)
    n = c.dim(i)
    for w in range(1, w_max + 1):
        for _, words in f2.weight_class_words(n, w):
            syn = out.mv_words(words)
            is_cycle = ~syn.any(axis=1)
            if not is_cycle.any():
                continue
            cand = words[is_cycle]
            residue = f2.reduce_words(cand.copy(), b_rref.words, b_pivots)
            nontrivial = residue.any(axis=1)
            if nontrivial.any():
                pick = int(np.nonzero(nontrivial)[0][0])
                return w, BitVector(n, cand[pick].copy())
    return EXCEEDED, None


def cosystole(c: ChainComplex, i: int, w_max: int) -> int | Exceeded:
    """Systole of the dual complex at the matching degree."""
    return systole(dual(c), c.top - i, w_max)


def systolic_expansion(
    c: ChainComplex, i: int, max_dim: int = 24
) -> tuple[Fraction | float, BitVector | None]:
    """Exact systolic expansion at degree i, with a witness.

    Returns (ε, f) where ε = min over f ∉ ker ∂ of ‖∂f‖ / dist(f, ker ∂) and
    the witness attains it.  Key reduction: both numerator and denominator
    depend only on the syndrome s = ∂f — the denominator is the minimum
    weight in the coset {g : ∂g = s} — so the minimization runs over the
    2^dim syndrome table rather than over pairs (f, z).  When ∂ = 0 there is
    no admissible f and (inf, None) is returned.
    """
    require_valid(c)
    d = c.dim(i)
    if d > max_dim:
        raise TooLarge(f"degree-{i} space has dimension {d} > {max_dim}")
    out = c.boundary_out(i)
    if out.rows == 0 or out.is_zero() or d == 0:
        return inf, None

    # syndrome of every f in input-index order, built by doubling
    nw_s = f2.nwords(out.rows)
    syn = np.zeros((1 << d, nw_s), dtype=np.uint64)
    for j in range(d):
        col = f2.pack_dense(out.to_dense()[:, j])
        half = 1 << j
        syn[half : 2 * half] = syn[:half] ^ col[None, :]

    f_weights = np.bitwise_count(np.arange(1 << d, dtype=np.uint64)).astype(np.int64)
    if nw_s == 1:
        uniq, inverse = np.unique(syn[:, 0], return_inverse=True)
        uniq_words = uniq[:, None]
    else:
        uniq_words, inverse = np.unique(syn, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    coset_min = np.full(uniq_words.shape[0], 1 << 30, dtype=np.int64)
    np.minimum.at(coset_min, inverse, f_weights)

    syn_weights = np.asarray(f2.weight_of_words(uniq_words))
    nonzero = syn_weights > 0
    if not nonzero.any():
        return inf, None
    # exact rational argmin without per-bucket Fraction objects: every
    # denominator divides lcm(1..max_dim), so sw/cm scaled by that lcm is an
    # exact integer
    scale = lcm(*range(1, max_dim + 1))
    safe_cm = np.maximum(coset_min, 1)
    scaled = np.where(nonzero, syn_weights * (scale // safe_cm), np.iinfo(np.int64).max)
    bucket = int(scaled.argmin())
    eps = Fraction(int(syn_weights[bucket]), int(coset_min[bucket]))
    members = np.nonzero(inverse == bucket)[0]
    pick = int(members[np.argmin(f_weights[members])])
    witness = BitVector.from_dense(
        np.array([(pick >> j) & 1 for j in range(d)], dtype=np.uint8)
    )
    return eps, witness
