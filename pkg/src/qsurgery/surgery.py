"""Merging a CSS code with an ancilla complex along a chain map.

The central object is a :class:`ChainMap` gamma from an ancilla complex D
into the code complex C, carrying ancilla qubits onto data qubits.  Merging
first extends D downward by one level that kills its degree-0 homology
(`append_quotient_level`), then forms a mapping cone.  Two independent
assembly routes are provided and must agree bit for bit:

* :func:`cone_complex` -- generic mapping cone of the extended chain map;
* :func:`total_complex` -- explicit block check matrices of the merged CSS
  code, converted to a complex afterwards.

On top of the merged complex live the derived quantities: the number of
surviving logical qubits (`merged_dimension`, computed two ways and
cross-checked), representatives for them (`merged_logical_basis`), the
measurement bookkeeping used by the protocol (`build_plan`), the
deformation-validity checks (`check_def2`), and the two error metrics
(`surgery_distance`, `fault_distance`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import f2
from .csscode import CssCode, from_complex, to_complex
from .f2 import EXCEEDED, BitMatrix, BitVector, Exceeded
from .homology import (
    ChainComplex,
    _invalid_reason,
    _Reducer,
    homology_basis,
    homology_dim,
    require_valid,
)


def _member(rref_m: BitMatrix, pivots: tuple[int, ...], v: BitVector) -> bool:
    """Rowspace membership against a precomputed RREF."""
    res = f2.reduce_words(v.words.copy()[None, :], rref_m.words, pivots)
    return not res.any()


@dataclass(frozen=True)
class ChainMap:
    """A degree-shifting chain map between two chain complexes.

    ``maps[j]`` carries degree ``j`` of ``source`` to degree ``j + shift`` of
    ``target``; one matrix per source degree, with zero-dimensional matrices
    standing in where the target degree does not exist.  Commutation
    (checked by :func:`chain_map_error`, not at construction) reads

        maps[j-1] @ source-boundary(j) == target-boundary(j+shift) @ maps[j]
    """

    source: ChainComplex
    target: ChainComplex
    maps: tuple[BitMatrix, ...]
    shift: int = 0

    def __post_init__(self) -> None:
        if len(self.maps) != self.source.top + 1:
            raise ValueError(
                f"expected {self.source.top + 1} component maps, got {len(self.maps)}"
            )
        for j, m in enumerate(self.maps):
            want = (self.target.dim(j + self.shift), self.source.dim(j))
            if m.shape != want:
                raise ValueError(
                    f"component {j} has shape {m.shape}, expected {want}"
                )

    def component(self, j: int) -> BitMatrix:
        """Component at source degree ``j`` (zero-shaped outside the range)."""
        if 0 <= j <= self.source.top:
            return self.maps[j]
        return BitMatrix.zeros(self.target.dim(j + self.shift), self.source.dim(j))


def chain_map_error(m: ChainMap) -> str | None:
    """None if the squares commute, else a message naming the first failure."""
    for c, label in ((m.source, "source"), (m.target, "target")):
        reason = _invalid_reason(c)
        if reason is not None:
            return f"{label} complex invalid: {reason}"
    for j in range(1, m.source.top + 1):
        lhs = m.maps[j - 1] @ m.source.boundary_out(j)
        rhs = m.target.boundary_out(j + m.shift) @ m.maps[j]
        if lhs != rhs:
            return (
                f"square at source degrees {j}->{j - 1} does not commute "
                f"(target degrees {j + m.shift}->{j + m.shift - 1})"
            )
    return None


def validate_chain_map(m: ChainMap) -> bool:
    return chain_map_error(m) is None


def require_valid_chain_map(m: ChainMap) -> None:
    reason = chain_map_error(m)
    if reason is not None:
        raise ValueError(f"invalid chain map: {reason}")


def append_quotient_level(d: ChainComplex) -> ChainComplex:
    """Extend ``d`` one level below degree 0, killing its degree-0 homology.

    The new bottom map Q has full row rank with ker Q = im(boundary into
    degree 0), so degree 0 of the extension has trivial homology and the new
    level has dimension dim(D_0) - rank(that boundary).  Levels shift up by
    one in the result.
    """
    require_valid(d)
    b1 = d.boundary_out(1)
    q_rows = f2.kernel_basis(b1.T)
    q = BitMatrix.from_rows(q_rows, cols=d.dim(0))
    return ChainComplex((q.rows, *d.degrees), (q, *d.boundaries))


def extend_with_quotient(m: ChainMap) -> ChainMap:
    """Prepend the quotient level to the source and the induced bottom map.

    The bottom component is forced by commutation: with Q the new bottom
    boundary and R any right inverse of Q (Q has full row rank, so R
    exists), the component is target-boundary(shift) @ maps[0] @ R.  The
    result is independent of the choice of R because ker Q is the image of
    the source's degree-1 boundary, which the composite kills.
    """
    require_valid_chain_map(m)
    dext = append_quotient_level(m.source)
    q = dext.boundaries[0]
    below = m.target.dim(m.shift - 1)
    if below == 0 or q.rows == 0:
        gamma_bottom = BitMatrix.zeros(below, q.rows)
    else:
        cols = []
        for i in range(q.rows):
            x = f2.solve(q, BitVector.from_support(q.rows, [i]))
            if x is None:  # pragma: no cover - Q has full row rank
                raise AssertionError("quotient map lost full row rank")
            cols.append(x)
        right_inv = BitMatrix.from_rows(cols, cols=q.cols).T
        gamma_bottom = m.target.boundary_out(m.shift) @ m.maps[0] @ right_inv
    ext = ChainMap(dext, m.target, (gamma_bottom, *m.maps), m.shift - 1)
    require_valid_chain_map(ext)
    return ext


def mapping_cone(m: ChainMap) -> ChainComplex:
    """Mapping cone of a (shifted) chain map, source block first.

    Level ``l`` is source_(l - shift - 1) ++ target_l and the boundary is
    lower block triangular with the map component in the off-diagonal block.
    """
    s = m.shift
    top = max(m.target.top, m.source.top + s + 1)

    def src_deg(level: int) -> int:
        return level - s - 1

    degrees = tuple(
        m.source.dim(src_deg(level)) + m.target.dim(level)
        for level in range(top + 1)
    )
    boundaries = []
    for level in range(1, top + 1):
        j = src_deg(level)
        blocks = [
            [
                m.source.boundary_out(j),
                BitMatrix.zeros(m.source.dim(j - 1), m.target.dim(level)),
            ],
            [m.component(j), m.target.boundary_out(level)],
        ]
        boundaries.append(BitMatrix.block(blocks))
    return ChainComplex(degrees, tuple(boundaries))


@dataclass(frozen=True)
class MergedCode:
    """The merged complex plus the block bookkeeping needed downstream.

    ``total`` is the merged chain complex, ``code`` the same data as check
    matrices.  In every level of ``total`` the ancilla block comes first:
    qubits are ordered (ancilla qubits, data qubits), X checks (ancilla
    checks, code X checks), Z checks (quotient checks, code Z checks).
    """

    total: ChainComplex
    code: CssCode
    qubit_degree: int
    ancilla_qubits: int
    ancilla_x_checks: int
    ancilla_x_metas: int
    quotient_z_checks: int
    extended: ChainMap

    @property
    def n(self) -> int:
        return self.total.dim(self.qubit_degree)

    @property
    def base(self) -> ChainComplex:
        return self.extended.target

    def embed_data_vector(self, v: BitVector) -> BitVector:
        """A vector on data qubits, padded with zeros on the ancilla block."""
        return BitVector.zeros(self.ancilla_qubits).concat(v)

    def x_check_functional(self, s_anc: BitVector) -> BitVector:
        """An outcome functional over ancilla X checks, extended by zeros."""
        pad = self.code.hx.rows - self.ancilla_x_checks
        return s_anc.concat(BitVector.zeros(pad))


def _assemble(ext: ChainMap, route: str) -> MergedCode:
    c = ext.target
    qd = ext.shift + 2  # merged qubit degree; ancilla qubits sit at ext degree 1
    if qd < 1 or qd > 2 or c.top > qd + 2 or ext.source.top > 3:
        raise ValueError(
            "merge needs a CSS-shaped target around the qubit degree and an "
            "ancilla complex of at most three levels"
        )
    dext = ext.source
    sizes = dict(
        ancilla_qubits=dext.dim(1),
        ancilla_x_checks=dext.dim(2),
        ancilla_x_metas=dext.dim(3),
        quotient_z_checks=dext.dim(0),
    )

    if route == "cone":
        total = mapping_cone(ext)
        code = from_complex(total, qd)
        return MergedCode(total, code, qd, extended=ext, **sizes)

    # Explicit route: write down the merged check matrices block by block.
    n_c = c.dim(qd)
    hz_m = BitMatrix.block(
        [
            [dext.boundaries[0], BitMatrix.zeros(dext.dim(0), n_c)],
            [ext.maps[1], c.boundary_out(qd)],
        ]
    )
    hx_m = BitMatrix.block(
        [
            [dext.boundary_out(2).T, ext.component(2).T],
            [BitMatrix.zeros(c.dim(qd + 1), dext.dim(1)), c.boundary_in(qd).T],
        ]
    )
    mx_m = None
    if dext.top >= 3 or c.top >= qd + 2:
        mx_m = BitMatrix.block(
            [
                [dext.boundary_out(3).T, ext.component(3).T],
                [BitMatrix.zeros(c.dim(qd + 2), dext.dim(2)), c.boundary_in(qd + 1).T],
            ]
        )
    mz_m = None
    if qd - 2 >= 0:
        mz_m = BitMatrix.hstack([ext.maps[0], c.boundary_out(qd - 1)])
    code = CssCode(hx_m, hz_m, mx_m, mz_m)
    return MergedCode(to_complex(code), code, qd, extended=ext, **sizes)


def cone_complex(m: ChainMap) -> MergedCode:
    """Merge via the generic mapping cone of the quotient-extended map."""
    return _assemble(extend_with_quotient(m), "cone")


def total_complex(m: ChainMap) -> MergedCode:
    """Merge via explicit block check matrices; bit-identical to the cone."""
    return _assemble(extend_with_quotient(m), "total")


def _measured_image_reducer(m: ChainMap) -> tuple[_Reducer, int]:
    """Reducer seeded with code X-check rows, then fed the mapped 1-cycles.

    Returns the reducer and the count of mapped cycle images that were
    independent of the X-check rowspace (and of each other), i.e. the number
    of logical-qubit classes the gadget measures.
    """
    c = m.target
    qd = m.shift + 1
    hx = c.boundary_in(qd).T
    red = _Reducer(c.dim(qd))
    for r in range(hx.rows):
        red.add(hx.row(r))
    measured = 0
    for z in f2.kernel_basis(m.source.boundary_out(1)):
        if red.add(m.maps[1] @ z):
            measured += 1
    return red, measured


def merged_dimension(m: ChainMap) -> int:
    """Number of logical qubits after merging, computed two ways.

    The rank route counts code logicals minus independent measured classes;
    the direct route takes the homology dimension of the merged complex at
    the qubit degree.  Disagreement means the assembly is wrong somewhere,
    so it is fatal rather than a return value.
    """
    require_valid_chain_map(m)
    c = m.target
    qd = m.shift + 1
    k_c = homology_dim(c, qd)
    _, measured = _measured_image_reducer(m)
    by_rank = k_c - measured
    merged = total_complex(m)
    direct = homology_dim(merged.total, merged.qubit_degree)
    if by_rank != direct:
        raise RuntimeError(
            f"merged dimension mismatch: rank formula gives {by_rank}, "
            f"merged-complex homology gives {direct}"
        )
    return direct


def merged_logical_basis(m: ChainMap) -> list[BitVector]:
    """X-logical representatives of the merged code, one per surviving class.

    Representatives are 1-cycles of the base code, independent of the span
    of the X checks together with all measured images, embedded on the data
    block (ancilla coordinates zero).  Their count must match
    :func:`merged_dimension`.
    """
    require_valid_chain_map(m)
    c = m.target
    qd = m.shift + 1
    red, measured = _measured_image_reducer(m)
    reps = []
    for z in f2.kernel_basis(c.boundary_out(qd)):
        if red.add(z):
            reps.append(z)
    k_c = homology_dim(c, qd)
    if len(reps) != k_c - measured:  # pragma: no cover - rank identity
        raise AssertionError("surviving representative count disagrees with ranks")
    merged = total_complex(m)
    out = [merged.embed_data_vector(z) for z in reps]
    rr, piv = f2.rref(merged.code.hx)
    for v in out:
        if _member(rr, piv, v):  # pragma: no cover - sanity check
            raise AssertionError("representative fell into the merged stabilizer")
    return out


@dataclass(frozen=True)
class SurgeryPlan:
    """Measurement bookkeeping for one merge.

    ``basis[l]`` is the measured logical representative on data qubits,
    ``preimages[l]`` the indicator (over ancilla X checks) of the outcome
    subset whose product reconstructs it, and ``k_e`` the number of logical
    qubits the merged code retains.
    """

    basis: tuple[BitVector, ...]
    preimages: tuple[BitVector, ...]
    k_e: int

    def __len__(self) -> int:
        return len(self.basis)


def build_plan(m: ChainMap) -> SurgeryPlan:
    """Choose measured representatives and their outcome subsets.

    Walks homology representatives z of the ancilla complex at degree 1;
    keeps gamma_1(z) whenever it is independent of the X-check rowspace plus
    the representatives already kept.  The outcome subset for a kept class
    is supp(z) itself: summing gamma_1 over it reproduces the representative
    by linearity, so no separate preimage solve is needed.
    """
    require_valid_chain_map(m)
    c = m.target
    qd = m.shift + 1
    hx = c.boundary_in(qd).T
    red = _Reducer(c.dim(qd))
    for r in range(hx.rows):
        red.add(hx.row(r))
    basis: list[BitVector] = []
    pre: list[BitVector] = []
    for z in homology_basis(m.source, 1).representatives:
        h = m.maps[1] @ z
        if red.add(h):
            basis.append(h)
            pre.append(z)
    k_e = homology_dim(c, qd) - len(basis)
    return SurgeryPlan(tuple(basis), tuple(pre), k_e)


@dataclass(frozen=True)
class Def2Report:
    """Outcome of the three deformation requirements, with failure notes."""

    measures_target: bool
    no_other_logical: bool
    checks_commute: bool
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.measures_target and self.no_other_logical and self.checks_commute

    def __bool__(self) -> bool:
        return self.ok


def check_def2(
    merged: MergedCode,
    logical: BitVector,
    logicals: list[BitVector] | tuple[BitVector, ...],
    audit_wmax: int = 0,
) -> Def2Report:
    """Check that the merge measures ``logical`` and nothing else.

    Requirement 1: the target representative, embedded on the data block,
    lies in the merged X-check rowspace.  Requirement 2: no representative
    from ``logicals`` outside span(X checks, target) does.  Membership of an
    embedded data vector in the merged rowspace is invariant under adding
    base X-check rows, so one representative per class is conclusive; with
    ``audit_wmax > 0`` this invariance is additionally confirmed on all
    coset elements up to that weight.  Requirement 3: merged X and Z checks
    commute (vacuous when construction succeeded, kept as a direct check).
    """
    hx_m = merged.code.hx
    rr, piv = f2.rref(hx_m)
    failures: list[str] = []

    def measured(v: BitVector) -> bool:
        return _member(rr, piv, merged.embed_data_vector(v))

    req1 = measured(logical)
    if not req1:
        failures.append("target logical is not in the merged X-check rowspace")

    hx_base = merged.base.boundary_in(merged.qubit_degree).T
    brr, bpiv = f2.rref(hx_base)
    allowed = BitMatrix.vstack(
        [hx_base, BitMatrix.from_rows([logical], cols=len(logical))]
    )
    arr, apiv = f2.rref(allowed)
    req2 = True
    for u in logicals:
        if _member(arr, apiv, u):
            continue  # same class as the target (or a stabilizer): measuring it is fine
        hit = measured(u)
        for w in range(audit_wmax + 1):
            # confirm the verdict on every coset element of u up to weight w
            for _idx, words in f2.weight_class_words(len(u), w):
                delta = f2.reduce_words(words ^ u.words[None, :], brr.words, bpiv)
                for t in np.nonzero(~delta.any(axis=1))[0]:
                    same_coset = BitVector(len(u), words[t].copy())
                    if measured(same_coset) != hit:  # pragma: no cover
                        raise AssertionError(
                            "measured-set membership not coset invariant"
                        )
        if hit:
            req2 = False
            failures.append("a logically inequivalent representative is measured")
            break

    prod = hx_m @ merged.code.hz.T
    req3 = prod.is_zero()
    if not req3:  # pragma: no cover - CssCode construction enforces this
        failures.append("merged X and Z checks do not commute")
    return Def2Report(req1, req2, req3, tuple(failures))


def surgery_distance(
    merged: MergedCode, s: BitVector, w_max: int
) -> int | Exceeded:
    """Minimum weight of a meta-invisible X-outcome error pattern flipping s.

    Patterns e range over outcome bit strings on the merged X checks that
    every merged X-meta check accepts (the kernel of that meta matrix; with
    no meta checks, all patterns), and the functional flip is s . e = 1.
    Weight classes are enumerated ascending; `EXCEEDED` past ``w_max``.
    """
    m_rows = merged.code.hx.rows
    if len(s) != m_rows:
        raise ValueError(f"functional has length {len(s)}, expected {m_rows}")
    if s.is_zero():
        raise ValueError("functional is identically zero; nothing to flip")
    mx = merged.code.mx
    meta = mx if mx is not None else BitMatrix.zeros(0, m_rows)
    s_words = s.words[None, :]
    for w in range(1, w_max + 1):
        for _idx, words in f2.weight_class_words(m_rows, w):
            ok = np.ones(len(words), dtype=bool)
            if meta.rows:
                ok = ~meta.mv_words(words).any(axis=1)
            if not ok.any():
                continue
            flip = f2.weight_of_words(words[ok] & s_words) & 1
            if (flip == 1).any():
                return w
    return EXCEEDED


def _fault_effect_matrices(
    merged: MergedCode, plan: SurgeryPlan
) -> tuple[BitMatrix, BitMatrix]:
    """Per-location detector and corruption effects for the one-round model.

    Locations, in order: flips of the ancilla X-check outcomes, Z errors on
    ancilla qubits, Z errors on data qubits.  Detector bits are the ancilla
    meta checks applied to the accumulated outcome error, then the base
    X-check syndrome of the data error (seen by the perfect closing round).
    Corruption bits are the plan functionals on the accumulated outcome
    error.
    """
    dext = merged.extended.source
    c = merged.base
    qd_c = merged.qubit_degree
    d1 = merged.ancilla_x_checks
    d0 = merged.ancilla_qubits
    n_c = c.dim(qd_c)
    b1 = dext.boundary_out(2)  # ancilla checks -> ancilla qubits
    b2t = dext.boundary_out(3).T  # meta rows over ancilla checks
    g1 = merged.extended.maps[2]  # ancilla checks include into data qubits
    hx_base = c.boundary_in(qd_c).T

    outcome_rows = []  # location -> accumulated outcome error over d1 bits
    base_rows = []  # location -> data-qubit error (for the closing round)
    for v in range(d1):
        outcome_rows.append(BitVector.from_support(d1, [v]))
        base_rows.append(BitVector.zeros(n_c))
    for u in range(d0):
        outcome_rows.append(b1.T @ BitVector.from_support(d0, [u]))
        base_rows.append(BitVector.zeros(n_c))
    for qb in range(n_c):
        e = BitVector.from_support(n_c, [qb])
        outcome_rows.append(g1.T @ e)
        base_rows.append(e)

    n_loc = d1 + d0 + n_c
    det_rows = []
    cor_rows = []
    for out_e, base_e in zip(outcome_rows, base_rows):
        det_rows.append((b2t @ out_e).concat(hx_base @ base_e))
        flips = np.array([s.dot(out_e) for s in plan.preimages], dtype=np.uint8)
        cor_rows.append(BitVector.from_dense(flips))
    det = BitMatrix.from_rows(det_rows, cols=b2t.rows + hx_base.rows)
    cor = BitMatrix.from_rows(cor_rows, cols=len(plan))
    assert det.rows == n_loc and cor.rows == n_loc
    return det, cor


def fault_distance(
    merged: MergedCode, plan: SurgeryPlan, w_max: int
) -> int | Exceeded:
    w, _ = fault_distance_witness(merged, plan, w_max)
    return w


def fault_distance_witness(
    merged: MergedCode, plan: SurgeryPlan, w_max: int
) -> tuple[int | Exceeded, tuple[int, ...] | None]:
    """Smallest undetectable-but-corrupting fault set in the one-round model.

    A fault set is a subset of locations (ancilla outcome flips, ancilla
    qubit Z errors, data qubit Z errors).  It is undetectable when all
    ancilla meta checks and the perfect closing base round see nothing, and
    corrupting when some plan functional's reconstructed outcome flips.
    Returns (weight, location indices) or (EXCEEDED, None).
    """
    det, cor = _fault_effect_matrices(merged, plan)
    n_loc = det.rows
    det_t = det.T
    cor_t = cor.T
    for w in range(1, w_max + 1):
        for _idx, words in f2.weight_class_words(n_loc, w):
            silent = ~det_t.mv_words(words).any(axis=1)
            if not silent.any():
                continue
            corrupt = cor_t.mv_words(words[silent]).any(axis=1)
            if corrupt.any():
                pos = np.nonzero(silent)[0][np.nonzero(corrupt)[0][0]]
                return w, BitVector(n_loc, words[pos].copy()).support()
    return EXCEEDED, None
