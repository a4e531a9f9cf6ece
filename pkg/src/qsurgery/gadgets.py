"""Constructions of ancilla complexes for measuring a chosen X logical.

Three routes are provided.  `subcomplex_gadget` carves the ancilla out of
the base code itself: a set of X-operator generators, the qubits they live
on, and every Z check touching those qubits.  `gauging_gadget` builds the
ancilla from a graph on the logical's support (one ancilla qubit per edge,
one X check per vertex).  `assemble_branched` glues gauge levels onto a
deformed code complex, yielding the ancilla used when several commuting
logicals are measured through shared structure.

All constructors return objects that validate: the complex squares to zero
and the chain map into the base code commutes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import f2
from .csscode import CssCode, to_complex
from .f2 import BitMatrix, BitVector
from .homology import ChainComplex, dual, require_valid
from .surgery import ChainMap, require_valid_chain_map


@dataclass(frozen=True)
class GadgetRecipe:
    """A serializable description of how to build a gadget for one logical.

    ``kind`` selects the constructor.  For ``subcomplex`` the payload is the
    generator vectors plus the qubit and Z-check index sets; for ``gauging``
    it is the edge list over the logical's support (empty meaning the
    complete graph).  ``branched-assembly`` recipes exist as a tag for
    gadgets built in code via :func:`assemble_branched`; they carry whole
    complexes rather than index lists and are not built from files.
    """

    kind: str
    logical: BitVector
    x_checks: tuple[BitVector, ...] = ()
    qubits: tuple[int, ...] = ()
    z_checks: tuple[int, ...] = ()
    edges: tuple[tuple[int, int], ...] = ()


KINDS = ("subcomplex", "gauging", "branched-assembly")


def subcomplex_gadget(
    code: CssCode,
    x_checks: list[BitVector] | tuple[BitVector, ...],
    qubits: list[int] | tuple[int, ...],
    z_checks: list[int] | tuple[int, ...],
) -> tuple[ChainComplex, ChainMap]:
    """Restrict the base code to a subcomplex and include it back.

    Levels: the given X operators (top), the listed qubits, the listed Z
    checks with columns restricted to those qubits.  The chain map is the
    inclusion on qubits and Z checks; each X operator maps to a set of base
    X checks producing it (found by solving against the X-check matrix).

    Rejects inputs whose boundaries escape the declared sets: an operator
    supported off the qubit list, a qubit touched by an unlisted Z check, or
    an operator that is not a product of base X checks.
    """
    qubits = tuple(dict.fromkeys(qubits))
    z_checks = tuple(dict.fromkeys(z_checks))
    n = code.n
    qpos = {q: i for i, q in enumerate(qubits)}
    if qubits and not all(0 <= q < n for q in qubits):
        raise ValueError("qubit index out of range")
    if z_checks and not all(0 <= r < code.hz.rows for r in z_checks):
        raise ValueError("Z-check index out of range")

    for g in x_checks:
        if len(g) != n:
            raise ValueError(f"generator has length {len(g)}, expected {n}")
        if not set(g.support()) <= set(qubits):
            raise ValueError("generator supported outside the declared qubits")

    hz_dense = code.hz.to_dense()
    touching = {
        int(r) for r in np.nonzero(hz_dense[:, list(qubits)].any(axis=1))[0]
    } if qubits else set()
    if touching != set(z_checks):
        raise ValueError(
            "declared Z checks differ from the checks touching the qubit set"
        )

    b1 = BitMatrix.from_dense(hz_dense[np.array(z_checks, dtype=np.int64)][:, list(qubits)]) \
        if z_checks else BitMatrix.zeros(0, len(qubits))
    b2 = BitMatrix.from_rows(
        [g.restrict(qubits) for g in x_checks], cols=len(qubits)
    ).T
    d = ChainComplex((len(z_checks), len(qubits), len(x_checks)), (b1, b2))
    require_valid(d)

    gamma0 = BitMatrix.from_rows(
        [BitVector.from_support(code.hz.rows, [r]) for r in z_checks],
        cols=code.hz.rows,
    ).T
    gamma1 = BitMatrix.from_rows(
        [BitVector.from_support(n, [q]) for q in qubits], cols=n
    ).T
    g2_cols = []
    for g in x_checks:
        a = f2.solve(code.hx.T, g)
        if a is None:
            raise ValueError("generator is not a product of base X checks")
        g2_cols.append(a)
    gamma2 = BitMatrix.from_rows(g2_cols, cols=code.hx.rows).T

    base = to_complex(code)
    shift = code.qubit_degree - 1
    m = ChainMap(d, base, (gamma0, gamma1, gamma2), shift)
    require_valid_chain_map(m)
    return d, m


def connected(n_vertices: int, edges: tuple[tuple[int, int], ...]) -> bool:
    """Whether the graph on 0..n_vertices-1 with these edges is connected."""
    if n_vertices <= 1:
        return True
    parent = list(range(n_vertices))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        parent[find(u)] = find(v)
    root = find(0)
    return all(find(v) == root for v in range(n_vertices))


def complete_graph(k: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(k) for j in range(i + 1, k))


def gauging_gadget(
    code: CssCode,
    logical: BitVector,
    edges: tuple[tuple[int, int], ...] | None = None,
) -> tuple[ChainComplex, ChainMap]:
    """Graph-based ancilla for one X logical.

    Vertices are the logical's support; ``edges`` index into that support
    (sorted ascending), defaulting to the complete graph.  The ancilla has
    one qubit per edge and one X check per vertex, with the vertex check
    acting on the vertex's data qubit and its incident edges.  Each base Z
    check overlapping the logical gets extended by an edge set whose graph
    boundary matches the (even) overlap; independent graph cycles surface as
    the new Z checks when the gadget is merged.

    Rejects disconnected graphs — a disconnected gauging measures finer
    observables than the logical itself.
    """
    verts = logical.support()
    nv = len(verts)
    if nv == 0:
        raise ValueError("logical has empty support")
    if edges is None:
        edges = complete_graph(nv)
    edges = tuple((min(u, v), max(u, v)) for u, v in edges)
    for u, v in edges:
        if u == v:
            raise ValueError(f"self-loop on vertex {u}")
        if not (0 <= u < nv and 0 <= v < nv):
            raise ValueError(f"edge ({u},{v}) outside vertex range 0..{nv - 1}")
    if not connected(nv, edges):
        raise ValueError("gauging graph is not connected")

    ne = len(edges)
    inc = np.zeros((ne, nv), dtype=np.uint8)
    for i, (u, v) in enumerate(edges):
        inc[i, u] ^= 1
        inc[i, v] ^= 1
    b1 = BitMatrix.from_dense(inc)  # vertices -> edges
    d = ChainComplex((ne, nv), (b1,))

    gamma1 = BitMatrix.from_rows(
        [BitVector.from_support(code.n, [q]) for q in verts], cols=code.n
    ).T
    incidence_t = b1.T  # vertices x edges
    rows = []
    for r in range(code.hz.rows):
        overlap = code.hz.row(r).restrict(verts)
        x = f2.solve(incidence_t, overlap)
        if x is None:  # pragma: no cover - even overlap is guaranteed
            raise ValueError(
                f"Z check {r} overlaps the logical oddly; they do not commute"
            )
        rows.append(x)
    gamma0 = BitMatrix.from_rows(rows, cols=ne)

    base = to_complex(code)
    shift = code.qubit_degree - 1
    m = ChainMap(d, base, (gamma0, gamma1), shift)
    require_valid_chain_map(m)
    return d, m


def assemble_branched(c_prime: ChainComplex, f: ChainMap) -> ChainComplex:
    """Glue gauge levels onto a deformed code complex.

    ``c_prime`` is read against its grading: level ``j`` of the result pairs
    the degree-(top-j) space of ``c_prime`` with one gauge level, and the
    boundaries are the transposed ``c_prime`` boundaries extended by the
    gauge maps in the off-diagonal block.  Equivalently, the result is the
    mapping cone over the gauge coboundaries, regraded top-down.

    ``f`` packages the gauge data as a chain map with ``target`` equal to
    the dual of ``c_prime`` and ``shift -1``: source level ``j`` holds gauge
    level top+1-j, source boundaries are the gauge coboundaries, and the
    component at source level ``j`` lands in dual level ``j-1``.  With an
    empty gauge complex the result is exactly ``dual(c_prime)``.
    """
    dc = dual(c_prime)
    if f.target != dc:
        raise ValueError("map target must be the dual of the deformed complex")
    if f.shift != -1:
        raise ValueError(f"gauge map must have shift -1, got {f.shift}")
    if f.source.top != c_prime.top:
        raise ValueError(
            f"gauge complex has top {f.source.top}, expected {c_prime.top}"
        )
    require_valid_chain_map(f)

    top = c_prime.top
    degrees = tuple(dc.dim(j) + f.source.dim(j) for j in range(top + 1))
    boundaries = []
    for j in range(1, top + 1):
        blocks = [
            [dc.boundary_out(j), f.component(j)],
            [
                BitMatrix.zeros(f.source.dim(j - 1), dc.dim(j)),
                f.source.boundary_out(j),
            ],
        ]
        boundaries.append(BitMatrix.block(blocks))
    d = ChainComplex(degrees, tuple(boundaries))
    require_valid(d)
    return d


def branched_input(
    c_prime: ChainComplex,
    gauge_coboundaries: list[BitMatrix] | tuple[BitMatrix, ...],
    gauge_maps: list[BitMatrix] | tuple[BitMatrix, ...],
) -> ChainMap:
    """Package gauge data in ascending order into the map for assembly.

    ``gauge_coboundaries[i]`` sends gauge level i+1 to level i+2 and
    ``gauge_maps[i]`` sends gauge level i+1 into degree i+1 of ``c_prime``;
    both lists have one entry per positive degree of ``c_prime``.  The top
    gauge level (one above the last coboundary's input) carries no map.
    """
    top = c_prime.top
    if len(gauge_coboundaries) != top or len(gauge_maps) != top:
        raise ValueError(f"expected {top} coboundaries and {top} maps")
    gauge_dims = [m.cols for m in gauge_coboundaries] + [gauge_coboundaries[-1].rows] \
        if top else [0]
    source = ChainComplex(
        tuple(reversed(gauge_dims)), tuple(reversed(gauge_coboundaries))
    )
    dc = dual(c_prime)
    comps: list[BitMatrix] = [BitMatrix.zeros(0, source.dim(0))]
    for j in range(1, top + 1):
        comps.append(gauge_maps[top - j])
    return ChainMap(source, dc, tuple(comps), -1)


def build_gadget(code: CssCode, recipe: GadgetRecipe) -> tuple[ChainComplex, ChainMap]:
    """Dispatch a recipe to its constructor."""
    if recipe.kind == "subcomplex":
        return subcomplex_gadget(
            code, recipe.x_checks, recipe.qubits, recipe.z_checks
        )
    if recipe.kind == "gauging":
        return gauging_gadget(code, recipe.logical, recipe.edges or None)
    if recipe.kind == "branched-assembly":
        raise ValueError(
            "branched-assembly recipes carry whole complexes; "
            "call assemble_branched directly"
        )
    raise ValueError(f"unknown recipe kind {recipe.kind!r}; expected one of {KINDS}")
