"""CSS codes as chain complexes, with optional meta-checks.

A code is two parity-check matrices ``hx``/``hz`` over the same qubits, plus
optional meta-check matrices ``mx``/``mz`` recording redundancy among the
checks (every row of ``mx`` is a linear relation satisfied by the rows of
``hx``).  The equivalent chain complex puts Z-checks below the qubits and
X-checks above, with meta levels one step further out; when a Z-meta level
is present the whole grading shifts up by one so that internal degrees stay
0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import f2, homology
from .f2 import BitMatrix, BitVector, EXCEEDED
from .homology import ChainComplex

__all__ = [
    "CssCode",
    "CodeParams",
    "DistanceBound",
    "to_complex",
    "params",
    "logical_basis",
    "omega_bound",
    "matrix_omega",
]


@dataclass(frozen=True)
class CssCode:
    """A CSS code; construction validates shapes and orthogonality."""

    hx: BitMatrix
    hz: BitMatrix
    mx: BitMatrix | None = None
    mz: BitMatrix | None = None

    def __post_init__(self):
        if self.hx.cols != self.hz.cols:
            raise ValueError(
                f"hx has {self.hx.cols} columns but hz has {self.hz.cols}"
            )
        if not (self.hx @ self.hz.T).is_zero():
            raise ValueError("X and Z checks do not commute: hx @ hz.T != 0")
        if self.mx is not None:
            if self.mx.cols != self.hx.rows:
                raise ValueError(
                    f"mx has {self.mx.cols} columns but hx has {self.hx.rows} rows"
                )
            if not (self.mx @ self.hx).is_zero():
                raise ValueError("X meta-checks do not annihilate hx: mx @ hx != 0")
        if self.mz is not None:
            if self.mz.cols != self.hz.rows:
                raise ValueError(
                    f"mz has {self.mz.cols} columns but hz has {self.hz.rows} rows"
                )
            if not (self.mz @ self.hz).is_zero():
                raise ValueError("Z meta-checks do not annihilate hz: mz @ hz != 0")

    @property
    def n(self) -> int:
        return self.hx.cols

    @property
    def num_x_checks(self) -> int:
        return self.hx.rows

    @property
    def num_z_checks(self) -> int:
        return self.hz.rows

    @property
    def qubit_degree(self) -> int:
        """Internal degree of the qubit level in :func:`to_complex`."""
        return 2 if self.mz is not None else 1

    def k(self) -> int:
        return self.n - f2.rank(self.hx) - f2.rank(self.hz)


@dataclass(frozen=True)
class DistanceBound:
    """An exact distance or a certified lower bound from a cut-off search."""

    value: int
    exact: bool

    def __str__(self) -> str:
        return str(self.value) if self.exact else f">{self.value}"

    def at_least(self, bound: int) -> bool:
        """Whether the true distance is certainly ≥ bound."""
        return self.value >= bound if self.exact else self.value + 1 >= bound


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    dx: DistanceBound | None
    dz: DistanceBound | None
    omega: int

    def __str__(self) -> str:
        if self.k == 0 or self.dx is None or self.dz is None:
            return f"[[{self.n}, {self.k}, -]] (omega {self.omega})"
        return f"[[{self.n}, {self.k}, dx={self.dx}, dz={self.dz}]] (omega {self.omega})"


def to_complex(code: CssCode) -> ChainComplex:
    """The chain complex of the code.

    Bottom-up: optional Z-meta level, Z-checks, qubits, X-checks, optional
    X-meta level.  Boundary out of the qubit level is ``hz`` and into it is
    ``hx.T``; meta levels attach via ``mz`` (down) and ``mx.T`` (up).
    """
    degrees = [code.hz.rows, code.n, code.hx.rows]
    boundaries = [code.hz, code.hx.T]
    if code.mx is not None:
        degrees.append(code.mx.rows)
        boundaries.append(code.mx.T)
    if code.mz is not None:
        degrees.insert(0, code.mz.rows)
        boundaries.insert(0, code.mz)
    return ChainComplex(tuple(degrees), tuple(boundaries))


def from_complex(c: ChainComplex, qubit_degree: int) -> CssCode:
    """Read a CSS code off a complex, designating the qubit level.

    Only the two adjacent levels become checks; levels one further out (when
    present) become meta-checks.
    """
    homology.require_valid(c)
    q = qubit_degree
    if not 1 <= q <= c.top:
        raise ValueError(f"qubit degree {q} needs check levels on both sides")
    hz = c.boundary_out(q)
    hx = c.boundary_in(q).T
    mx = c.boundary_in(q + 1).T if q + 1 < c.top else None
    mz = c.boundary_out(q - 1) if q - 1 > 0 else None
    # meta levels of dimension zero are meaningful (they assert "no
    # redundancy") only when explicitly present in the complex
    return CssCode(hx=hx, hz=hz, mx=mx, mz=mz)


def matrix_omega(m: BitMatrix) -> int:
    """Max row/column weight of one matrix (its sparseness bound)."""
    return m.max_weight()


def omega_bound(code: CssCode) -> int:
    """Sparseness bound over every stored check matrix and its transpose."""
    mats = [code.hx, code.hz]
    if code.mx is not None:
        mats.append(code.mx)
    if code.mz is not None:
        mats.append(code.mz)
    return max((m.max_weight() for m in mats), default=0)


def logical_basis(code: CssCode, sector: str) -> list[BitVector]:
    """Independent logical representatives for one sector.

    X logicals are homology classes at the qubit degree (cycles of ``hz``
    modulo rows of ``hx``); Z logicals are the cohomology classes (cycles of
    ``hx`` modulo rows of ``hz``).
    """
    c = to_complex(code)
    q = code.qubit_degree
    if sector == "X":
        return list(homology.homology_basis(c, q).representatives)
    if sector == "Z":
        return list(homology.cohomology_basis(c, q).representatives)
    raise ValueError(f"sector must be 'X' or 'Z', got {sector!r}")


def params(code: CssCode, w_max: int) -> CodeParams:
    """Code parameters with exhaustive distances up to ``w_max``.

    ``k`` is exact.  Distances are exact when ≤ ``w_max``; otherwise the
    bound ``> w_max`` is reported.  For k = 0 both distances are None.
    """
    k = code.k()
    omega = omega_bound(code)
    if k == 0:
        return CodeParams(code.n, 0, None, None, omega)
    c = to_complex(code)
    q = code.qubit_degree
    dx = homology.systole(c, q, w_max)
    dz = homology.cosystole(c, q, w_max)

    def to_bound(d):
        if d is EXCEEDED:
            return DistanceBound(w_max, exact=False)
        return DistanceBound(int(d), exact=True)

    return CodeParams(code.n, k, to_bound(dx), to_bound(dz), omega)
