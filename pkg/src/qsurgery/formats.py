"""Plain-text file formats for the objects the command line passes around.

Everything is line oriented so files diff cleanly: ``#`` starts a comment,
blank lines are ignored, and each object opens with a kind line (``matrix``,
``complex``, ``chainmap``, ``code``, ``recipe <kind>``).  Matrices are dense
0/1 rows preceded by a ``shape r c`` line; a matrix with no rows or no
columns carries no row lines at all.  Experiment descriptions are ``key=value``
lines and results travel as CSV with a fixed column set.

Loading is purely syntactic — shape bookkeeping is checked here, while
semantic validity (complexes squaring to zero, chain maps commuting) is the
consumer's business, mirroring how the in-memory constructors behave.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .csscode import CssCode
from .f2 import BitMatrix, BitVector
from .gadgets import GadgetRecipe
from .homology import ChainComplex
from .surgery import ChainMap

__all__ = [
    "FormatError",
    "dump_matrix",
    "load_matrix",
    "dump_complex",
    "load_complex",
    "dump_chain_map",
    "load_chain_map",
    "dump_code",
    "load_code",
    "dump_recipe",
    "load_recipe",
    "ExperimentSettings",
    "dump_experiment",
    "load_experiment",
    "CSV_COLUMNS",
    "write_results_csv",
    "read_results_csv",
]


class FormatError(ValueError):
    """Raised when a file does not parse as the expected object."""


class _Cursor:
    """Iterator over meaningful lines: comments stripped, blanks dropped."""

    def __init__(self, text: str):
        self.lines = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if line:
                self.lines.append(line)
        self.pos = 0

    def next(self, what: str) -> str:
        if self.pos >= len(self.lines):
            raise FormatError(f"unexpected end of input; expected {what}")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect(self, literal: str) -> None:
        line = self.next(repr(literal))
        if line != literal:
            raise FormatError(f"expected {literal!r}, found {line!r}")

    def finish(self) -> None:
        if self.pos < len(self.lines):
            raise FormatError(f"trailing content: {self.lines[self.pos]!r}")


def _ints(tokens: Iterable[str], what: str) -> tuple[int, ...]:
    out = []
    for t in tokens:
        try:
            out.append(int(t))
        except ValueError:
            raise FormatError(f"cannot parse {what} entry {t!r}") from None
    return tuple(out)


# -- matrices ----------------------------------------------------------------


def _matrix_lines(m: BitMatrix) -> list[str]:
    out = [f"shape {m.rows} {m.cols}"]
    if m.rows and m.cols:
        for row in m.to_dense():
            out.append("".join("1" if b else "0" for b in row))
    return out


def _read_matrix(cur: _Cursor) -> BitMatrix:
    toks = cur.next("a shape line").split()
    if len(toks) != 3 or toks[0] != "shape":
        raise FormatError(f"expected 'shape r c', found {' '.join(toks)!r}")
    rows, cols = _ints(toks[1:], "shape")
    if rows < 0 or cols < 0:
        raise FormatError(f"negative shape {rows} {cols}")
    if rows == 0 or cols == 0:
        return BitMatrix.zeros(rows, cols)
    dense = np.zeros((rows, cols), dtype=np.uint8)
    for i in range(rows):
        line = cur.next(f"matrix row {i}")
        if len(line) != cols or set(line) - {"0", "1"}:
            raise FormatError(f"row {i} is not a {cols}-bit 0/1 string: {line!r}")
        dense[i] = np.frombuffer(line.encode(), dtype=np.uint8) - ord("0")
    return BitMatrix.from_dense(dense)


def dump_matrix(m: BitMatrix) -> str:
    return "\n".join(["matrix", *_matrix_lines(m)]) + "\n"


def load_matrix(text: str) -> BitMatrix:
    cur = _Cursor(text)
    cur.expect("matrix")
    m = _read_matrix(cur)
    cur.finish()
    return m


# -- chain complexes -----------------------------------------------------------


def _complex_lines(c: ChainComplex) -> list[str]:
    out = ["complex", "degrees " + " ".join(str(d) for d in c.degrees)]
    for i, b in enumerate(c.boundaries):
        out.append(f"boundary {i + 1}")
        out.extend(_matrix_lines(b))
    return out


def _read_complex(cur: _Cursor) -> ChainComplex:
    cur.expect("complex")
    toks = cur.next("a degrees line").split()
    if not toks or toks[0] != "degrees" or len(toks) == 1:
        raise FormatError("expected 'degrees d0 d1 ...'")
    degrees = _ints(toks[1:], "degrees")
    if any(d < 0 for d in degrees):
        raise FormatError(f"negative degree in {degrees}")
    boundaries = []
    for i in range(len(degrees) - 1):
        cur.expect(f"boundary {i + 1}")
        m = _read_matrix(cur)
        if (m.rows, m.cols) != (degrees[i], degrees[i + 1]):
            raise FormatError(
                f"boundary {i + 1} has shape {m.rows}x{m.cols}, "
                f"expected {degrees[i]}x{degrees[i + 1]}"
            )
        boundaries.append(m)
    return ChainComplex(degrees, tuple(boundaries))


def dump_complex(c: ChainComplex) -> str:
    return "\n".join(_complex_lines(c)) + "\n"


def load_complex(text: str) -> ChainComplex:
    cur = _Cursor(text)
    c = _read_complex(cur)
    cur.finish()
    return c


# -- chain maps ----------------------------------------------------------------


def dump_chain_map(m: ChainMap) -> str:
    out = ["chainmap", f"shift {m.shift}", "source"]
    out.extend(_complex_lines(m.source))
    out.append("target")
    out.extend(_complex_lines(m.target))
    for j, comp in enumerate(m.maps):
        out.append(f"map {j}")
        out.extend(_matrix_lines(comp))
    return "\n".join(out) + "\n"


def load_chain_map(text: str) -> ChainMap:
    cur = _Cursor(text)
    cur.expect("chainmap")
    toks = cur.next("a shift line").split()
    if len(toks) != 2 or toks[0] != "shift":
        raise FormatError("expected 'shift s'")
    (shift,) = _ints(toks[1:], "shift")
    cur.expect("source")
    source = _read_complex(cur)
    cur.expect("target")
    target = _read_complex(cur)
    maps = []
    for j in range(source.top + 1):
        cur.expect(f"map {j}")
        maps.append(_read_matrix(cur))
    cur.finish()
    return ChainMap(source, target, tuple(maps), shift)


# -- CSS codes -------------------------------------------------------------------

_CODE_FIELDS = ("hx", "hz", "mx", "mz")


def dump_code(code: CssCode) -> str:
    out = ["code"]
    for name in _CODE_FIELDS:
        m = getattr(code, name)
        if m is None:
            out.append(f"{name} none")
        else:
            out.append(name)
            out.extend(_matrix_lines(m))
    return "\n".join(out) + "\n"


def load_code(text: str) -> CssCode:
    cur = _Cursor(text)
    cur.expect("code")
    parts: dict[str, BitMatrix | None] = {}
    for name in _CODE_FIELDS:
        toks = cur.next(f"the {name} block").split()
        if toks[0] != name:
            raise FormatError(f"expected the {name} block, found {toks[0]!r}")
        if len(toks) == 2 and toks[1] == "none":
            if name in ("hx", "hz"):
                raise FormatError(f"{name} cannot be none")
            parts[name] = None
        elif len(toks) == 1:
            parts[name] = _read_matrix(cur)
        else:
            raise FormatError(f"cannot parse block header {' '.join(toks)!r}")
    cur.finish()
    return CssCode(parts["hx"], parts["hz"], mx=parts["mx"], mz=parts["mz"])


# -- gadget recipes ----------------------------------------------------------------

_FILE_KINDS = ("subcomplex", "gauging")


def dump_recipe(r: GadgetRecipe) -> str:
    if r.kind not in _FILE_KINDS:
        raise FormatError(
            f"recipe kind {r.kind!r} has no file form; expected one of {_FILE_KINDS}"
        )
    out = [f"recipe {r.kind}", f"length {r.logical.n}"]
    out.append("logical " + " ".join(str(i) for i in r.logical.support()))
    for g in r.x_checks:
        out.append("x_check " + " ".join(str(i) for i in g.support()))
    if r.qubits:
        out.append("qubits " + " ".join(str(i) for i in r.qubits))
    if r.z_checks:
        out.append("z_checks " + " ".join(str(i) for i in r.z_checks))
    if r.edges:
        out.append("edges " + " ".join(f"{u}-{v}" for u, v in r.edges))
    return "\n".join(out) + "\n"


def load_recipe(text: str) -> GadgetRecipe:
    cur = _Cursor(text)
    toks = cur.next("a recipe header").split()
    if len(toks) != 2 or toks[0] != "recipe":
        raise FormatError("expected 'recipe <kind>'")
    kind = toks[1]
    if kind not in _FILE_KINDS:
        raise FormatError(
            f"recipe kind {kind!r} has no file form; expected one of {_FILE_KINDS}"
        )
    toks = cur.next("a length line").split()
    if len(toks) != 2 or toks[0] != "length":
        raise FormatError("expected 'length n'")
    (n,) = _ints(toks[1:], "length")
    if n < 0:
        raise FormatError(f"negative length {n}")

    logical: BitVector | None = None
    x_checks: list[BitVector] = []
    qubits: tuple[int, ...] = ()
    z_checks: tuple[int, ...] = ()
    edges: list[tuple[int, int]] = []
    while cur.pos < len(cur.lines):
        key, *rest = cur.next("a recipe field").split()
        if key == "logical":
            if logical is not None:
                raise FormatError("duplicate logical line")
            logical = BitVector.from_support(n, _ints(rest, "logical"))
        elif key == "x_check":
            x_checks.append(BitVector.from_support(n, _ints(rest, "x_check")))
        elif key == "qubits":
            qubits = _ints(rest, "qubits")
        elif key == "z_checks":
            z_checks = _ints(rest, "z_checks")
        elif key == "edges":
            for tok in rest:
                parts = tok.split("-")
                if len(parts) != 2:
                    raise FormatError(f"cannot parse edge token {tok!r}")
                u, v = _ints(parts, "edge")
                edges.append((u, v))
        else:
            raise FormatError(f"unknown recipe field {key!r}")
    if logical is None:
        raise FormatError("recipe is missing a logical line")
    return GadgetRecipe(
        kind,
        logical,
        x_checks=tuple(x_checks),
        qubits=qubits,
        z_checks=z_checks,
        edges=tuple(edges),
    )


# -- experiment descriptions ---------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSettings:
    """What an experiment file pins down: the scheme plus sampling knobs."""

    scheme: str
    rounds: int
    rates: tuple[float, ...]
    shots: int
    seed: int


_EXPERIMENT_KEYS = ("scheme", "rounds", "rates", "shots", "seed")


def dump_experiment(s: ExperimentSettings) -> str:
    return (
        f"scheme={s.scheme}\n"
        f"rounds={s.rounds}\n"
        f"rates={','.join(repr(p) for p in s.rates)}\n"
        f"shots={s.shots}\n"
        f"seed={s.seed}\n"
    )


def load_experiment(text: str) -> ExperimentSettings:
    kv: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"expected key=value, found {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _EXPERIMENT_KEYS:
            raise FormatError(f"unknown experiment key {key!r}")
        if key in kv:
            raise FormatError(f"duplicate experiment key {key!r}")
        kv[key] = value
    missing = [k for k in _EXPERIMENT_KEYS if k not in kv]
    if missing:
        raise FormatError(f"experiment file is missing keys: {', '.join(missing)}")
    try:
        rounds = int(kv["rounds"])
        shots = int(kv["shots"])
        seed = int(kv["seed"])
        rates = tuple(float(t) for t in kv["rates"].split(",") if t.strip())
    except ValueError as exc:
        raise FormatError(f"cannot parse experiment numbers: {exc}") from None
    if rounds < 1:
        raise FormatError(f"rounds must be >= 1, got {rounds}")
    if shots < 1:
        raise FormatError(f"shots must be >= 1, got {shots}")
    if not rates:
        raise FormatError("rates list is empty")
    if any(not 0.0 < p < 0.5 for p in rates):
        raise FormatError(f"rates must lie in (0, 0.5): {rates}")
    return ExperimentSettings(kv["scheme"], rounds, rates, shots, seed)


# -- result tables -----------------------------------------------------------------

CSV_COLUMNS = ("scheme", "rounds", "p", "shots", "failures", "rate", "ci_low", "ci_high")

_CSV_TYPES = {
    "scheme": str,
    "rounds": int,
    "p": float,
    "shots": int,
    "failures": int,
    "rate": float,
    "ci_low": float,
    "ci_high": float,
}


def write_results_csv(rows: Iterable[Mapping[str, object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        try:
            writer.writerow([str(row[c]) for c in CSV_COLUMNS])
        except KeyError as exc:
            raise FormatError(f"result row is missing column {exc.args[0]!r}") from None
    return buf.getvalue()


def read_results_csv(text: str) -> list[dict[str, object]]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise FormatError("results CSV is empty")
    for col in CSV_COLUMNS:
        if col not in reader.fieldnames:
            raise FormatError(f"results CSV is missing column {col!r}")
    out = []
    for record in reader:
        row: dict[str, object] = {}
        for col in CSV_COLUMNS:
            value = record[col]
            try:
                row[col] = _CSV_TYPES[col](value)
            except (TypeError, ValueError):
                raise FormatError(
                    f"cannot parse column {col!r} value {value!r}"
                ) from None
        out.append(row)
    return out
