"""A six-block circulant CSS code family with single-shot meta checks.

The code is built from four circulant polynomials A, B, C, D over Z_l.
Qubits form six length-l blocks, X and Z checks four blocks each, and one
extra block of meta checks hangs off either side, making both check
matrices redundant in a way a decoder can exploit.

`build` constructs any member from a `MultiCycleSpec`; `case_study` returns
the l=7 instance studied throughout (A=1+x, B=1+x^2, C=1+x^3, D=1+x^4,
a [[42,6,4]] code) together with the subcomplex gadget recipe for measuring
its first X logical: two families of cleaning generators, the 16 qubits
they cover, and the 20 Z checks touching those qubits.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .csscode import CssCode
from .f2 import BitMatrix, BitVector
from .gadgets import GadgetRecipe


@dataclass(frozen=True)
class MultiCycleSpec:
    """Cycle length and the exponent lists of the four polynomials."""

    l: int
    a: tuple[int, ...]
    b: tuple[int, ...]
    c: tuple[int, ...]
    d: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.l < 1:
            raise ValueError(f"cycle length must be positive, got {self.l}")


def circulant(l: int, exponents: tuple[int, ...]) -> BitMatrix:
    """The l x l circulant with row i supported on (i + e) mod l."""
    m = np.zeros((l, l), dtype=np.uint8)
    for e in exponents:
        idx = (np.arange(l) + e) % l
        m[np.arange(l), idx] ^= 1
    return BitMatrix.from_dense(m)


def parse_spec(text: str) -> MultiCycleSpec:
    """Parse "l=7; A=0,1; B=0,2; C=0,3; D=0,4" (newlines also separate)."""
    fields: dict[str, str] = {}
    for part in re.split(r"[;\n]", text):
        part = part.strip()
        if not part or part.startswith("#"):
            continue
        if "=" not in part:
            raise ValueError(f"cannot parse spec fragment {part!r}")
        key, _, val = part.partition("=")
        fields[key.strip().lower()] = val.strip()
    missing = [k for k in ("l", "a", "b", "c", "d") if k not in fields]
    if missing:
        raise ValueError(f"spec is missing fields: {', '.join(missing)}")

    def exps(key: str) -> tuple[int, ...]:
        return tuple(int(t) for t in fields[key].split(",") if t.strip())

    return MultiCycleSpec(int(fields["l"]), exps("a"), exps("b"), exps("c"), exps("d"))


def format_spec(spec: MultiCycleSpec) -> str:
    parts = [f"l={spec.l}"]
    for name in ("a", "b", "c", "d"):
        parts.append(f"{name.upper()}=" + ",".join(str(e) for e in getattr(spec, name)))
    return "; ".join(parts)


def build(spec: MultiCycleSpec) -> CssCode:
    """The six-block code of a spec: n=6l, 4l checks per side, l metas each."""
    l = spec.l
    a = circulant(l, spec.a)
    b = circulant(l, spec.b)
    c = circulant(l, spec.c)
    d = circulant(l, spec.d)
    at, bt, ct, dt = a.T, b.T, c.T, d.T
    z = BitMatrix.zeros(l, l)
    hx = BitMatrix.block(
        [
            [bt, ct, z, dt, z, z],
            [at, z, ct, z, dt, z],
            [z, at, bt, z, z, dt],
            [z, z, z, at, bt, ct],
        ]
    )
    hz = BitMatrix.block(
        [
            [c, b, a, z, z, z],
            [d, z, z, b, a, z],
            [z, d, z, c, z, a],
            [z, z, d, z, c, b],
        ]
    )
    mx = BitMatrix.block([[at, bt, ct, dt]])
    mz = BitMatrix.block([[d, c, b, a]])
    return CssCode(hx, hz, mx, mz)


# The l=7 study instance and its gadget data.  Polynomial supports are given
# per qubit block; a shift of s multiplies everything by x^s.
CASE_SPEC = MultiCycleSpec(7, (0, 1), (0, 2), (0, 3), (0, 4))
_LOGICAL_BLOCKS = {0: (0, 4), 2: (1,), 4: (4,)}
_CLEANER_BLOCKS = (
    {0: (0, 1), 2: (1, 5), 4: (1, 4)},
    {0: (4, 5), 2: (2, 5), 4: (1, 5)},
)


def _block_vector(l: int, blocks: dict[int, tuple[int, ...]], shift: int) -> BitVector:
    v = np.zeros(6 * l, dtype=np.uint8)
    for blk, exps in blocks.items():
        for e in exps:
            v[blk * l + (e + shift) % l] ^= 1
    return BitVector.from_dense(v)


def x_logical(shift: int = 0) -> BitVector:
    """The study instance's X logical, multiplied by x^shift."""
    return _block_vector(CASE_SPEC.l, _LOGICAL_BLOCKS, shift)


def cleaning_generators(shift: int = 0) -> tuple[BitVector, BitVector]:
    """The two X-check products that carry x_logical(shift) to x_logical(shift+1)."""
    return tuple(
        _block_vector(CASE_SPEC.l, blocks, shift) for blocks in _CLEANER_BLOCKS
    )


def case_study() -> tuple[CssCode, GadgetRecipe]:
    """The [[42,6,4]] instance plus its subcomplex gadget recipe.

    The gadget's generators are both cleaning families at shifts 0 and 1,
    the qubit set is everything they or the logical touch, and the Z checks
    are all rows meeting that set.
    """
    code = build(CASE_SPEC)
    logical = x_logical(0)
    gens: list[BitVector] = []
    for shift in (0, 1):
        gens.extend(cleaning_generators(shift))
    covered = set(logical.support())
    for g in gens:
        covered |= set(g.support())
    qubits = tuple(sorted(covered))
    hz_dense = code.hz.to_dense()
    z_rows = tuple(
        int(r) for r in np.nonzero(hz_dense[:, list(qubits)].any(axis=1))[0]
    )
    recipe = GadgetRecipe(
        kind="subcomplex",
        logical=logical,
        x_checks=tuple(gens),
        qubits=qubits,
        z_checks=z_rows,
    )
    return code, recipe
