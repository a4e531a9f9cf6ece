"""Dense bit-packed GF(2) linear algebra.

Vectors and matrices are stored as little-endian 64-bit words (bit ``i`` of a
row lives in word ``i // 64`` at position ``i % 64``).  Everything downstream
— boundary maps, parity checks, chain maps, syndromes — is built on the two
containers here.  All values are treated as immutable after construction;
operations return new objects.

The module also exposes a few word-level helpers (``weight_of_words``,
``reduce_words``, ``weight_class_words``) used by the exhaustive searches in
sibling modules.  They operate on raw ``uint64`` arrays for speed.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "BitVector",
    "BitMatrix",
    "EXCEEDED",
    "Exceeded",
    "rank",
    "rref",
    "row_basis",
    "kernel_basis",
    "solve",
    "in_rowspace",
    "min_weight_in_coset",
    "matrix_to_text",
    "matrix_from_text",
]


def nwords(nbits: int) -> int:
    """Number of 64-bit words needed to hold ``nbits`` bits."""
    return (nbits + 63) >> 6


def _tail_mask(nbits: int) -> np.uint64:
    """Mask keeping only the valid bits of the last word."""
    rem = nbits & 63
    if rem == 0:
        return np.uint64(0xFFFFFFFFFFFFFFFF)
    return np.uint64((1 << rem) - 1)


def _mask_tail(words: np.ndarray, nbits: int) -> np.ndarray:
    """Zero out the unused high bits of the last word (in place)."""
    if nbits & 63 and words.shape[-1]:
        words[..., -1] &= _tail_mask(nbits)
    return words


def pack_dense(dense: np.ndarray) -> np.ndarray:
    """Pack a 0/1 uint8 array (…, nbits) into (…, nwords) uint64 words."""
    dense = np.ascontiguousarray(dense, dtype=np.uint8)
    nbits = dense.shape[-1]
    nw = nwords(nbits)
    pad = nw * 64 - nbits
    if pad:
        dense = np.concatenate(
            [dense, np.zeros(dense.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1
        )
    packed = np.packbits(dense, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64)


def unpack_words(words: np.ndarray, nbits: int) -> np.ndarray:
    """Inverse of :func:`pack_dense`: (…, nwords) uint64 → (…, nbits) uint8."""
    if words.shape[-1] == 0:
        return np.zeros(words.shape[:-1] + (nbits,), dtype=np.uint8)
    as_bytes = np.ascontiguousarray(words).view(np.uint8)
    dense = np.unpackbits(as_bytes, axis=-1, bitorder="little")
    return dense[..., :nbits]


def weight_of_words(words: np.ndarray) -> np.ndarray | int:
    """Population count summed over the last axis."""
    counts = np.bitwise_count(words).sum(axis=-1, dtype=np.int64)
    return counts


def reduce_words(batch: np.ndarray, rref_words: np.ndarray, pivots: Sequence[int]) -> np.ndarray:
    """Reduce every packed row of ``batch`` modulo an RREF basis, in place.

    After the call, a row is all-zero iff the original row lay in the
    rowspace spanned by ``rref_words``.
    """
    one = np.uint64(1)
    for i, c in enumerate(pivots):
        w, b = c >> 6, np.uint64(c & 63)
        hit = ((batch[:, w] >> b) & one).astype(bool)
        if hit.any():
            batch[hit] ^= rref_words[i]
    return batch


def weight_class_words(
    n: int, w: int, chunk: int = 1 << 17
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Enumerate all weight-``w`` vectors of length ``n`` in packed batches.

    Yields ``(indices, words)`` pairs where ``indices`` has shape
    ``(batch, w)`` (the support of each candidate, lexicographic order) and
    ``words`` the corresponding packed rows.
    """
    nw = nwords(n)
    combos = itertools.combinations(range(n), w)
    one = np.uint64(1)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            return
        idx = np.array(block, dtype=np.int64).reshape(len(block), w)
        words = np.zeros((len(block), nw), dtype=np.uint64)
        rows = np.arange(len(block))
        for j in range(w):
            c = idx[:, j]
            np.bitwise_or.at(words, (rows, c >> 6), one << (c & 63).astype(np.uint64))
        yield idx, words


class BitVector:
    """A fixed-length vector over GF(2)."""

    __slots__ = ("n", "words")

    def __init__(self, n: int, words: np.ndarray | None = None):
        self.n = int(n)
        if words is None:
            words = np.zeros(nwords(self.n), dtype=np.uint64)
        else:
            words = np.array(words, dtype=np.uint64).reshape(nwords(self.n))
            _mask_tail(words, self.n)
        self.words = words

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(n)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        dense = np.fromiter((int(b) & 1 for b in bits), dtype=np.uint8)
        return cls(len(dense), pack_dense(dense))

    @classmethod
    def from_support(cls, n: int, support: Iterable[int]) -> "BitVector":
        v = np.zeros(n, dtype=np.uint8)
        idx = list(support)
        if idx:
            v[np.array(idx)] ^= 1
        return cls(n, pack_dense(v))

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "BitVector":
        dense = np.asarray(dense, dtype=np.uint8) & 1
        return cls(dense.shape[0], pack_dense(dense))

    def to_dense(self) -> np.ndarray:
        return unpack_words(self.words, self.n)

    def weight(self) -> int:
        return int(weight_of_words(self.words))

    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self.to_dense())[0])

    def get(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"bit index {i} out of range for length {self.n}")
        return int((self.words[i >> 6] >> np.uint64(i & 63)) & np.uint64(1))

    def is_zero(self) -> bool:
        return not self.words.any()

    def dot(self, other: "BitVector") -> int:
        """GF(2) inner product (parity of the AND)."""
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        return int(weight_of_words(self.words & other.words)) & 1

    def concat(self, other: "BitVector") -> "BitVector":
        return BitVector.from_dense(np.concatenate([self.to_dense(), other.to_dense()]))

    def restrict(self, positions: Sequence[int]) -> "BitVector":
        """The subvector picked out by ``positions`` (in the given order)."""
        return BitVector.from_dense(self.to_dense()[np.array(positions, dtype=np.int64)])

    def embed(self, n: int, positions: Sequence[int]) -> "BitVector":
        """Scatter this vector into a length-``n`` vector at ``positions``."""
        pos = np.array(positions, dtype=np.int64)
        if pos.shape[0] != self.n:
            raise ValueError("positions must list one target index per bit")
        dense = np.zeros(n, dtype=np.uint8)
        dense[pos] = self.to_dense()
        return BitVector.from_dense(dense)

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        return BitVector(self.n, self.words ^ other.words)

    __add__ = __xor__

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BitVector)
            and self.n == other.n
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return hash((self.n, self.words.tobytes()))

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        if self.n <= 80:
            return f"BitVector({self.to01()})"
        return f"BitVector(n={self.n}, weight={self.weight()})"

    def to01(self) -> str:
        return "".join("01"[b] for b in self.to_dense())


class BitMatrix:
    """A dense GF(2) matrix with bit-packed rows."""

    __slots__ = ("rows", "cols", "words")

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        self.rows = int(rows)
        self.cols = int(cols)
        nw = nwords(self.cols)
        if words is None:
            words = np.zeros((self.rows, nw), dtype=np.uint64)
        else:
            words = np.array(words, dtype=np.uint64).reshape(self.rows, nw)
            _mask_tail(words, self.cols)
        self.words = words

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "BitMatrix":
        dense = np.asarray(dense, dtype=np.uint8) & 1
        if dense.ndim != 2:
            raise ValueError(f"expected a 2-d array, got shape {dense.shape}")
        r, c = dense.shape
        return cls(r, c, pack_dense(dense))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]] | Sequence[BitVector], cols: int | None = None) -> "BitMatrix":
        if rows and isinstance(rows[0], BitVector):
            cols = rows[0].n if cols is None else cols
            dense = np.stack([r.to_dense() for r in rows]) if rows else np.zeros((0, cols), np.uint8)
            return cls.from_dense(dense)
        mat = np.array(rows, dtype=np.uint8)
        if mat.size == 0:
            return cls(len(rows), cols if cols is not None else 0)
        return cls.from_dense(mat)

    # -- shape and access --------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.words[i].copy())

    def column(self, j: int) -> BitVector:
        one = np.uint64(1)
        bits = (self.words[:, j >> 6] >> np.uint64(j & 63)) & one
        return BitVector.from_dense(bits.astype(np.uint8))

    def get(self, i: int, j: int) -> int:
        return int((self.words[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1))

    def to_dense(self) -> np.ndarray:
        return unpack_words(self.words, self.cols)

    def is_zero(self) -> bool:
        return not self.words.any()

    def row_weights(self) -> np.ndarray:
        return np.asarray(weight_of_words(self.words))

    def col_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=0, dtype=np.int64)

    def max_weight(self) -> int:
        """Largest row or column weight (0 for empty matrices)."""
        if self.rows == 0 or self.cols == 0:
            return 0
        return int(max(self.row_weights().max(), self.col_weights().max()))

    # -- algebra -----------------------------------------------------------

    @property
    def T(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    def mv(self, v: BitVector) -> BitVector:
        """Matrix–vector product over GF(2)."""
        if v.n != self.cols:
            raise ValueError(f"shape mismatch: {self.shape} @ vector of length {v.n}")
        par = weight_of_words(self.words & v.words[None, :]) & 1
        return BitVector.from_dense(np.asarray(par).astype(np.uint8))

    def mm(self, other: "BitMatrix") -> "BitMatrix":
        """Matrix–matrix product over GF(2)."""
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch: {self.shape} @ {other.shape}")
        prod = (self.to_dense().astype(np.int64) @ other.to_dense().astype(np.int64)) & 1
        return BitMatrix.from_dense(prod.astype(np.uint8))

    def mv_words(self, batch: np.ndarray) -> np.ndarray:
        """Apply to a packed batch of vectors: (N, nwords(cols)) → (N, nwords(rows)).

        Equivalent to stacking ``self.mv`` over the batch; used by the
        exhaustive searches.
        """
        out = np.zeros((batch.shape[0], nwords(self.rows)), dtype=np.uint64)
        if self.rows == 0 or self.cols == 0:
            return out
        colsyn = self.column_words()
        one = np.uint64(1)
        for j in range(self.cols):
            colbit = ((batch[:, j >> 6] >> np.uint64(j & 63)) & one).astype(bool)
            if colbit.any():
                out[colbit] ^= colsyn[j]
        return out

    def column_words(self) -> np.ndarray:
        """All columns packed as rows: shape (cols, nwords(rows))."""
        return pack_dense(np.ascontiguousarray(self.to_dense().T))

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            return self.mv(other)
        if isinstance(other, BitMatrix):
            return self.mm(other)
        return NotImplemented

    def __xor__(self, other: "BitMatrix") -> "BitMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        return BitMatrix(self.rows, self.cols, self.words ^ other.words)

    __add__ = __xor__

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.shape == other.shape
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"

    # -- stacking ----------------------------------------------------------

    @staticmethod
    def vstack(blocks: Sequence["BitMatrix"]) -> "BitMatrix":
        cols = {b.cols for b in blocks}
        if len(cols) > 1:
            raise ValueError(f"column counts differ: {sorted(cols)}")
        c = cols.pop() if cols else 0
        rows = sum(b.rows for b in blocks)
        out = BitMatrix(rows, c)
        r = 0
        for b in blocks:
            out.words[r : r + b.rows] = b.words
            r += b.rows
        return out

    @staticmethod
    def hstack(blocks: Sequence["BitMatrix"]) -> "BitMatrix":
        rows = {b.rows for b in blocks}
        if len(rows) > 1:
            raise ValueError(f"row counts differ: {sorted(rows)}")
        dense = np.concatenate([b.to_dense() for b in blocks], axis=1)
        return BitMatrix.from_dense(dense)

    @staticmethod
    def block(grid: Sequence[Sequence["BitMatrix"]]) -> "BitMatrix":
        return BitMatrix.vstack([BitMatrix.hstack(row) for row in grid])


class Exceeded:
    """Sentinel for exhaustive searches that hit their cutoff.

    Callers receiving this must report a bound, never an exact value.
    """

    _instance: "Exceeded | None" = None

    def __new__(cls) -> "Exceeded":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EXCEEDED"


EXCEEDED = Exceeded()


# ---------------------------------------------------------------------------
# elimination
# ---------------------------------------------------------------------------


def _echelon(W: np.ndarray, cols: int, full: bool) -> tuple[int, list[int]]:
    """Gaussian elimination on packed rows, restricted to the first ``cols``
    bit columns.  Pivots are chosen at the first nonzero column (deterministic
    bases).  Returns (rank, pivot column list); ``W`` is modified in place and
    its first ``rank`` rows end up in (reduced) row-echelon form.
    """
    nrows = W.shape[0]
    pivots: list[int] = []
    one = np.uint64(1)
    r = 0
    for c in range(cols):
        if r == nrows:
            break
        w, b = c >> 6, np.uint64(c & 63)
        col = (W[r:, w] >> b) & one
        hit = np.nonzero(col)[0]
        if hit.size == 0:
            continue
        p = r + int(hit[0])
        if p != r:
            W[[r, p]] = W[[p, r]]
        if full:
            sel = np.nonzero((W[:, w] >> b) & one)[0]
            sel = sel[sel != r]
        else:
            sel = r + 1 + np.nonzero((W[r + 1 :, w] >> b) & one)[0]
        if sel.size:
            W[sel] ^= W[r]
        pivots.append(c)
        r += 1
    return r, pivots


def rank(m: BitMatrix) -> int:
    """GF(2) rank via row elimination."""
    W = m.words.copy()
    r, _ = _echelon(W, m.cols, full=False)
    return r


def rref(m: BitMatrix) -> tuple[BitMatrix, tuple[int, ...]]:
    """Reduced row-echelon form.

    Returns ``(R, pivots)`` where ``R`` keeps only the ``rank`` nonzero rows
    and ``pivots[i]`` is the pivot column of row ``i``.
    """
    W = m.words.copy()
    r, pivots = _echelon(W, m.cols, full=True)
    return BitMatrix(r, m.cols, W[:r].copy()), tuple(pivots)


def row_basis(m: BitMatrix) -> BitMatrix:
    """A deterministic basis of the rowspace (the RREF rows)."""
    return rref(m)[0]


def kernel_basis(m: BitMatrix) -> list[BitVector]:
    """A basis of the right kernel {v : Mv = 0}.

    One vector per free column: the free column's bit is set, and each pivot
    column carries the RREF entry in the free column (standard back-fill).
    """
    R, pivots = rref(m)
    pivot_set = set(pivots)
    free = [c for c in range(m.cols) if c not in pivot_set]
    Rd = R.to_dense()
    piv = np.array(pivots, dtype=np.int64)
    out = []
    for f in free:
        v = np.zeros(m.cols, dtype=np.uint8)
        v[f] = 1
        if piv.size:
            v[piv] = Rd[:, f]
        out.append(BitVector.from_dense(v))
    return out


def solve(m: BitMatrix, b: BitVector) -> BitVector | None:
    """Any solution x of Mx = b, or None when b is outside the column space."""
    if b.n != m.rows:
        raise ValueError(f"rhs length {b.n} does not match {m.rows} rows")
    aug = BitMatrix.hstack([m, BitMatrix(m.rows, 1, pack_dense(b.to_dense()[:, None]))])
    W = aug.words.copy()
    r, pivots = _echelon(W, m.cols, full=True)
    # rows beyond the rank have zero coefficient part; a leftover rhs bit
    # there means b is not in the image
    bcol_w, bcol_b = m.cols >> 6, np.uint64(m.cols & 63)
    leftover = (W[r:, bcol_w] >> bcol_b) & np.uint64(1)
    if leftover.any():
        return None
    x = np.zeros(m.cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        x[c] = int((W[i, bcol_w] >> bcol_b) & np.uint64(1))
    return BitVector.from_dense(x)


def in_rowspace(m: BitMatrix, v: BitVector) -> bool:
    """Whether appending v as a row would leave the rank unchanged."""
    if v.n != m.cols:
        raise ValueError(f"vector length {v.n} does not match {m.cols} columns")
    R, pivots = rref(m)
    res = reduce_words(v.words.copy()[None, :], R.words, pivots)
    return not res.any()


def _coset_by_candidates(
    v: BitVector, R: BitMatrix, pivots: tuple[int, ...], w_max: int
) -> tuple[int, BitVector] | None:
    """Min-weight coset member by enumerating all vectors of weight ≤ w_max."""
    for w in range(w_max + 1):
        for idx, words in weight_class_words(v.n, w):
            res = reduce_words(words ^ v.words[None, :], R.words, pivots)
            hit = np.nonzero(~res.any(axis=1))[0]
            if hit.size:
                i = int(hit[0])
                return w, BitVector(v.n, words[i].copy())
    return None


def _coset_by_rowspace(v: BitVector, R: BitMatrix) -> tuple[int, BitVector]:
    """Min-weight coset member by enumerating the full rowspace of R."""
    k = R.rows
    nw = nwords(v.n)
    best_w = v.weight()
    best = v.words.copy()
    lo = min(k, 16)
    # table of the 2^lo combinations of the first lo rows
    table = np.zeros((1 << lo, nw), dtype=np.uint64)
    for j in range(lo):
        half = 1 << j
        table[half : 2 * half] = table[:half] ^ R.words[j]
    for hi_bits in range(1 << (k - lo)):
        offset = v.words.copy()
        for j in range(k - lo):
            if (hi_bits >> j) & 1:
                offset ^= R.words[lo + j]
        cand = table ^ offset[None, :]
        wts = np.asarray(weight_of_words(cand))
        i = int(wts.argmin())
        if wts[i] < best_w:
            best_w = int(wts[i])
            best = cand[i].copy()
    return best_w, BitVector(v.n, best)


def min_weight_in_coset(v: BitVector, s: BitMatrix, w_max: int) -> int | Exceeded:
    """Exact minimum of ‖v + x‖ over x in the rowspace of ``s``.

    Strategy: enumerate weight classes up to ``w_max`` when ``w_max`` ≤ 6;
    otherwise enumerate the rowspace when rank(s) ≤ 24; otherwise EXCEEDED.
    """
    res = min_weight_coset_witness(v, s, w_max)
    return res if isinstance(res, Exceeded) else res[0]


def min_weight_coset_witness(
    v: BitVector, s: BitMatrix, w_max: int
) -> tuple[int, BitVector] | Exceeded:
    """Like :func:`min_weight_in_coset` but also returns a minimizing vector."""
    if s.cols != v.n:
        raise ValueError(f"coset space has {s.cols} columns, vector has length {v.n}")
    R, pivots = rref(s)
    if w_max <= 6:
        found = _coset_by_candidates(v, R, pivots, w_max)
        return EXCEEDED if found is None else found
    if R.rows <= 24:
        return _coset_by_rowspace(v, R)
    return EXCEEDED


# ---------------------------------------------------------------------------
# fixture text format: first line "rows cols", then 0/1 rows
# ---------------------------------------------------------------------------


def matrix_to_text(m: BitMatrix) -> str:
    lines = [f"{m.rows} {m.cols}"]
    dense = m.to_dense()
    for i in range(m.rows):
        lines.append("".join("01"[b] for b in dense[i]))
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> BitMatrix:
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("matrix text needs a 'rows cols' header")
    r, c = int(tokens[0]), int(tokens[1])
    bits = "".join(tokens[2:])
    if len(bits) != r * c:
        raise ValueError(f"expected {r * c} bits for a {r}x{c} matrix, got {len(bits)}")
    bad = set(bits) - {"0", "1"}
    if bad:
        raise ValueError(f"matrix text contains non-binary characters: {sorted(bad)}")
    dense = np.frombuffer(bits.encode(), dtype=np.uint8).reshape(r, c) - ord("0")
    return BitMatrix.from_dense(dense)
