"""Stabilizer-tableau simulation of the joint X-measurement protocol.

The tableau follows the standard destabilizer/stabilizer layout: ``2n``
rows of X/Z bits plus a sign bit, rows ``0..n-1`` destabilizers and rows
``n..2n-1`` stabilizers, with row multiplication tracking the i-powers of
the single-qubit Pauli products.  On top of it sits the one-shot surgery
protocol: attach a zeroed ancilla register, measure one X-type check
operator per ancilla X check (ancilla boundary support plus mapped data
support), accumulate the logical outcomes over the plan's outcome subsets,
measure the ancilla register out in Z, apply the X correction solved from
the Z outcomes, and discard the register.

`exhaustive_fault_scan` replays the protocol under every small fault set
(check-outcome flips and Z errors on ancilla/data qubits) and classifies
each run as detected, benign, or corrupting — cross-checking every verdict
against the algebraic one-round fault model, so the two routes police each
other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import prod

import numpy as np

from . import f2
from .f2 import BitMatrix, BitVector
from .surgery import MergedCode, SurgeryPlan, _fault_effect_matrices

__all__ = [
    "PauliOperator",
    "x_pauli",
    "z_pauli",
    "Tableau",
    "FaultSet",
    "RunRecord",
    "prepare_code_state",
    "random_code_state",
    "run_fast_surgery",
    "classify_run",
    "ScanReport",
    "exhaustive_fault_scan",
]


@dataclass(frozen=True)
class PauliOperator:
    """A signed Pauli string: X part, Z part, and an overall sign of ±1."""

    x: BitVector
    z: BitVector
    sign: int = 1

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise ValueError(
                f"X and Z parts have different lengths: {len(self.x)} != {len(self.z)}"
            )
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def n(self) -> int:
        return len(self.x)

    def commutes_with(self, other: "PauliOperator") -> bool:
        return (self.x.dot(other.z) ^ self.z.dot(other.x)) == 0


def x_pauli(support: BitVector, sign: int = 1) -> PauliOperator:
    """The product of X on the support bits."""
    return PauliOperator(support, BitVector.zeros(len(support)), sign)


def z_pauli(support: BitVector, sign: int = 1) -> PauliOperator:
    """The product of Z on the support bits."""
    return PauliOperator(BitVector.zeros(len(support)), support, sign)


def _phase_exponents(xs, zs, xt, zt):
    """Per-qubit i-exponents when multiplying source (xs, zs) into (xt, zt).

    Single-qubit Pauli products contribute i^g with g in {-1, 0, +1}; the
    table is encoded arithmetically so it broadcasts across rows.
    """
    xs = xs.astype(np.int64)
    zs = zs.astype(np.int64)
    xt = xt.astype(np.int64)
    zt = zt.astype(np.int64)
    return (
        xs * zs * (zt - xt)
        + xs * (1 - zs) * (zt * (2 * xt - 1))
        + (1 - xs) * zs * (xt * (1 - 2 * zt))
    )


class Tableau:
    """A pure stabilizer state on ``n`` qubits, initially |0...0>."""

    def __init__(self, n: int):
        self.n = int(n)
        self.x = np.zeros((2 * self.n, self.n), dtype=np.uint8)
        self.z = np.zeros((2 * self.n, self.n), dtype=np.uint8)
        self.r = np.zeros(2 * self.n, dtype=np.uint8)
        self.x[: self.n] = np.eye(self.n, dtype=np.uint8)
        self.z[self.n :] = np.eye(self.n, dtype=np.uint8)
        self._destab_stale = False

    # -- views ---------------------------------------------------------------

    def _row_pauli(self, i: int) -> PauliOperator:
        return PauliOperator(
            BitVector.from_dense(self.x[i]),
            BitVector.from_dense(self.z[i]),
            -1 if self.r[i] else 1,
        )

    def stabilizer(self, i: int) -> PauliOperator:
        return self._row_pauli(self.n + i)

    def destabilizer(self, i: int) -> PauliOperator:
        self._ensure_destabilizers()
        return self._row_pauli(i)

    @property
    def stabilizers(self) -> list[PauliOperator]:
        return [self.stabilizer(i) for i in range(self.n)]

    def copy(self) -> "Tableau":
        out = Tableau.__new__(Tableau)
        out.n = self.n
        out.x = self.x.copy()
        out.z = self.z.copy()
        out.r = self.r.copy()
        out._destab_stale = self._destab_stale
        return out

    # -- internals -------------------------------------------------------------

    def _anticommutes(self, px: np.ndarray, pz: np.ndarray) -> np.ndarray:
        lhs = self.x.astype(np.int64) @ pz.astype(np.int64)
        rhs = self.z.astype(np.int64) @ px.astype(np.int64)
        return ((lhs + rhs) % 2).astype(bool)

    def _rowsum_into(self, targets: np.ndarray, src: int) -> None:
        """rows[t] <- rows[src] * rows[t] for each target, with exact signs."""
        if targets.size == 0:
            return
        g = _phase_exponents(
            self.x[src][None, :], self.z[src][None, :],
            self.x[targets], self.z[targets],
        ).sum(axis=1)
        total = 2 * self.r[targets].astype(np.int64) + 2 * int(self.r[src]) + g
        self.r[targets] = ((total % 4) // 2).astype(np.uint8)
        self.x[targets] ^= self.x[src]
        self.z[targets] ^= self.z[src]

    def _decompose_sign(self, px: np.ndarray, pz: np.ndarray) -> int:
        """Phase bit of the stabilizer-group element with bit pattern (px, pz).

        Accumulates the product of the stabilizer rows selected by the
        destabilizer anticommutation pattern; raises if the pattern does not
        reproduce (px, pz), i.e. the Pauli is not in the group up to sign.
        """
        self._ensure_destabilizers()
        ac = self._anticommutes(px, pz)
        ax = np.zeros(self.n, dtype=np.uint8)
        az = np.zeros(self.n, dtype=np.uint8)
        phase = 0
        for i in np.nonzero(ac[: self.n])[0]:
            s = self.n + int(i)
            phase += 2 * int(self.r[s]) + int(
                _phase_exponents(self.x[s], self.z[s], ax, az).sum()
            )
            ax ^= self.x[s]
            az ^= self.z[s]
        if not (np.array_equal(ax, px) and np.array_equal(az, pz)):
            raise ValueError("operator is not in the stabilizer group up to sign")
        phase %= 4
        if phase % 2:  # pragma: no cover - products of commuting Hermitians
            raise AssertionError("odd i-power in a stabilizer decomposition")
        return phase // 2

    def _ensure_destabilizers(self) -> None:
        if not self._destab_stale:
            return
        n = self.n
        sym = BitMatrix.from_dense(np.hstack([self.z[n:], self.x[n:]]))
        aug = BitMatrix.hstack([sym.T, BitMatrix.identity(2 * n)])
        rr, piv = f2.rref(aug)
        if tuple(piv[:n]) != tuple(range(n)):  # pragma: no cover - independent rows
            raise AssertionError("stabilizer rows are not independent")
        d = rr.to_dense()[:n, n:]  # row i pairs to +1 with stabilizer i only
        dx, dz = d[:, :n].copy(), d[:, n:].copy()
        # make the candidates commute pairwise: correcting d_j by the
        # stabilizer rows of earlier anticommuting candidates fixes each pair
        # without disturbing the delta pattern against the stabilizers
        pair = (
            dx.astype(np.int64) @ dz.T.astype(np.int64)
            + dz.astype(np.int64) @ dx.T.astype(np.int64)
        ) % 2
        fix = np.tril(pair, k=-1)  # fix[j, i] = 1: multiply d_j by stabilizer i
        dx ^= ((fix @ self.x[n:].astype(np.int64)) % 2).astype(np.uint8)
        dz ^= ((fix @ self.z[n:].astype(np.int64)) % 2).astype(np.uint8)
        self.x[:n] = dx
        self.z[:n] = dz
        self.r[:n] = 0
        self._destab_stale = False

    # -- operations ---------------------------------------------------------------

    def apply_pauli(self, p: PauliOperator) -> None:
        """Conjugate the state by p: stabilizer signs flip where they anticommute."""
        if p.n != self.n:
            raise ValueError(f"operator acts on {p.n} qubits, tableau has {self.n}")
        ac = self._anticommutes(p.x.to_dense(), p.z.to_dense())
        self.r[ac] ^= 1

    def measure(self, p: PauliOperator, rng: np.random.Generator) -> int:
        outcome, _ = self._measure(p, rng)
        return outcome

    def measure_to(self, p: PauliOperator, want: int, rng: np.random.Generator) -> None:
        """Measure p and steer a random outcome to ``want`` via the destabilizer."""
        outcome, q = self._measure(p, rng)
        if outcome != want:
            if q is None:
                raise ValueError("outcome is determined and cannot be steered")
            self.r[q] ^= 1  # apply the destabilizer of the collapsed row

    def _measure(
        self, p: PauliOperator, rng: np.random.Generator
    ) -> tuple[int, int | None]:
        if p.n != self.n:
            raise ValueError(f"operator acts on {p.n} qubits, tableau has {self.n}")
        px = p.x.to_dense()
        pz = p.z.to_dense()
        rp = 0 if p.sign == 1 else 1
        ac = self._anticommutes(px, pz)
        stab_hits = np.nonzero(ac[self.n :])[0]
        if stab_hits.size:
            self._ensure_destabilizers()
            q = self.n + int(stab_hits[0])
            others = np.nonzero(ac)[0]
            others = others[others != q]
            self._rowsum_into(others, q)
            self.x[q - self.n] = self.x[q]
            self.z[q - self.n] = self.z[q]
            self.r[q - self.n] = self.r[q]
            bit = int(rng.integers(2))
            self.x[q] = px
            self.z[q] = pz
            self.r[q] = (rp + bit) % 2
            return (1 if bit == 0 else -1), q
        sign_bit = self._decompose_sign(px, pz)
        return (1 if sign_bit == rp else -1), None

    def expectation(self, p: PauliOperator) -> int:
        """+1/-1 when ±p stabilizes the state, 0 when the outcome is random."""
        if p.n != self.n:
            raise ValueError(f"operator acts on {p.n} qubits, tableau has {self.n}")
        px = p.x.to_dense()
        pz = p.z.to_dense()
        if self._anticommutes(px, pz)[self.n :].any():
            return 0
        rp = 0 if p.sign == 1 else 1
        return 1 if self._decompose_sign(px, pz) == rp else -1

    def padded_front(self, k: int) -> "Tableau":
        """This state tensored with |0>^k on k new qubits placed in front."""
        out = Tableau(k + self.n)
        out.x[k : k + self.n, k:] = self.x[: self.n]
        out.z[k : k + self.n, k:] = self.z[: self.n]
        out.r[k : k + self.n] = self.r[: self.n]
        out.x[2 * k + self.n :, k:] = self.x[self.n :]
        out.z[2 * k + self.n :, k:] = self.z[self.n :]
        out.r[2 * k + self.n :] = self.r[self.n :]
        out._destab_stale = self._destab_stale
        return out

    def drop_front_qubits(self, k: int) -> "Tableau":
        """Restrict to the last n-k qubits; the first k must be exactly |0>.

        Stabilizer rows never carry X support on a zeroed qubit (they would
        anticommute with its Z, which is in the group), so the restriction is
        a Z-column elimination: pivot rows absorb the front Z bits and are
        dropped, the remainder generates the data-register group.
        Destabilizers are rebuilt lazily on demand.
        """
        n = self.n
        for e in range(k):
            probe = z_pauli(BitVector.from_support(n, [e]))
            if self.expectation(probe) != 1:
                raise RuntimeError(f"front qubit {e} is not in the zero state")
        work = self.copy()
        if work.x[n:, :k].any():  # pragma: no cover - excluded by the probes
            raise AssertionError("X support on a zeroed qubit")
        used: list[int] = []
        for e in range(k):
            col = work.z[n:, e].copy()
            col[[i - n for i in used]] = 0
            pivots = np.nonzero(col)[0]
            if pivots.size == 0:  # pragma: no cover - probes put Z_e in the group
                raise AssertionError(f"no stabilizer generator left for qubit {e}")
            q = n + int(pivots[0])
            rest = n + np.nonzero(work.z[n:, e])[0]
            rest = rest[rest != q]
            work._rowsum_into(rest, q)
            used.append(q)
        keep = [i for i in range(n, 2 * n) if i not in used]
        if len(keep) != n - k:  # pragma: no cover - rank bookkeeping
            raise AssertionError("restriction lost stabilizer generators")
        out = Tableau.__new__(Tableau)
        out.n = n - k
        out.x = np.zeros((2 * (n - k), n - k), dtype=np.uint8)
        out.z = np.zeros_like(out.x)
        out.r = np.zeros(2 * (n - k), dtype=np.uint8)
        rows = np.array(keep, dtype=int)
        if work.x[rows, :k].any() or work.z[rows, :k].any():  # pragma: no cover
            raise AssertionError("kept rows still touch the dropped register")
        out.x[n - k :] = work.x[rows, k:]
        out.z[n - k :] = work.z[rows, k:]
        out.r[n - k :] = work.r[rows]
        out._destab_stale = True
        return out

    def check(self) -> None:
        """Validate the commutation structure; raises AssertionError if broken."""
        self._ensure_destabilizers()
        n = self.n
        x64 = self.x.astype(np.int64)
        z64 = self.z.astype(np.int64)
        sym = (x64 @ z64.T + z64 @ x64.T) % 2
        ss = sym[n:, n:]
        ds = sym[:n, n:]
        dd = sym[:n, :n]
        if ss.any():
            raise AssertionError("stabilizer rows do not commute pairwise")
        if not np.array_equal(ds, np.eye(n, dtype=np.int64)):
            raise AssertionError("destabilizer pattern is not the identity")
        if dd.any():
            raise AssertionError("destabilizer rows do not commute pairwise")


# ---------------------------------------------------------------------------
# the measurement protocol
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FaultSet:
    """Faults injected into one protocol run.

    ``check_flips`` are reported-outcome flips of the ancilla X-check
    measurements (indices over ancilla X checks); ``ancilla_z`` and
    ``data_z`` are Z errors on ancilla/data qubits present throughout the
    measurement round.
    """

    check_flips: tuple[int, ...] = ()
    ancilla_z: tuple[int, ...] = ()
    data_z: tuple[int, ...] = ()

    @property
    def weight(self) -> int:
        return len(self.check_flips) + len(self.ancilla_z) + len(self.data_z)

    @classmethod
    def from_locations(cls, merged: MergedCode, locations) -> "FaultSet":
        """Decode flat location indices (check flips, ancilla Z, data Z)."""
        d1 = merged.ancilla_x_checks
        d0 = merged.ancilla_qubits
        n_c = merged.base.dim(merged.qubit_degree)
        checks, anc, data = [], [], []
        for loc in locations:
            if not 0 <= loc < d1 + d0 + n_c:
                raise ValueError(f"fault location {loc} out of range")
            if loc < d1:
                checks.append(loc)
            elif loc < d1 + d0:
                anc.append(loc - d1)
            else:
                data.append(loc - d1 - d0)
        return cls(tuple(checks), tuple(anc), tuple(data))

    def locations(self, merged: MergedCode) -> tuple[int, ...]:
        d1 = merged.ancilla_x_checks
        d0 = merged.ancilla_qubits
        return tuple(
            sorted(
                list(self.check_flips)
                + [d1 + e for e in self.ancilla_z]
                + [d1 + d0 + q for q in self.data_z]
            )
        )


@dataclass(frozen=True)
class RunRecord:
    """Everything one protocol run produced."""

    logical_outcomes: tuple[int, ...]
    check_outcomes: tuple[int, ...]
    ancilla_outcomes: tuple[int, ...]
    tableau: Tableau


def _gadget_blocks(merged: MergedCode) -> tuple[BitMatrix, BitMatrix, BitMatrix]:
    """(ancilla boundary, ancilla meta rows, data inclusion) of the gadget."""
    dext = merged.extended.source
    b1 = dext.boundary_out(2)  # ancilla X checks -> ancilla qubits
    b2t = dext.boundary_out(3).T  # meta rows over ancilla X checks
    g1 = merged.extended.maps[2]  # ancilla X checks -> data qubits
    return b1, b2t, g1


def prepare_code_state(hx: BitMatrix, rng: np.random.Generator) -> Tableau:
    """|0...0> steered into the +1 eigenspace of every X-check row."""
    t = Tableau(hx.cols)
    for i in range(hx.rows):
        t.measure_to(x_pauli(hx.row(i)), 1, rng)
    return t


def random_code_state(code, rng: np.random.Generator) -> Tableau:
    """A random stabilizer state inside the code space.

    Starts from the all-zeros logical state, flips random Z-basis labels
    with logical X representatives, then rotates a random subset of logicals
    into random X eigenstates.
    """
    from .csscode import logical_basis

    t = prepare_code_state(code.hx, rng)
    for xrep in logical_basis(code, "X"):
        if rng.integers(2):
            t.apply_pauli(x_pauli(xrep))
        if rng.integers(2):
            want = 1 if rng.integers(2) == 0 else -1
            if t.expectation(x_pauli(xrep)) == 0:
                t.measure_to(x_pauli(xrep), want, rng)
    return t


def run_fast_surgery(
    state: Tableau,
    plan: SurgeryPlan,
    merged: MergedCode,
    rng: np.random.Generator,
    faults: FaultSet | None = None,
) -> RunRecord:
    """Run the one-shot measurement protocol on a data-register state.

    The ancilla register is attached in front (zeroed), one X-type check
    operator is measured per ancilla X check, logical outcomes are the
    products over the plan's outcome subsets, the register is measured out
    in Z, the solved X correction is applied, and the register is dropped.
    Reported check outcomes carry the injected flips; the collapse itself
    always follows the true outcomes.
    """
    faults = faults or FaultSet()
    b1, _, g1 = _gadget_blocks(merged)
    d1, d0 = b1.cols, b1.rows
    n_c = merged.base.dim(merged.qubit_degree)
    if state.n != n_c:
        raise ValueError(f"state has {state.n} qubits, data register needs {n_c}")
    if any(len(pre) != d1 for pre in plan.preimages):
        raise ValueError("plan does not index this merge's ancilla X checks")
    t = state.padded_front(d0)

    for e in faults.ancilla_z:
        t.apply_pauli(z_pauli(BitVector.from_support(t.n, [e])))
    for q in faults.data_z:
        t.apply_pauli(z_pauli(BitVector.from_support(t.n, [d0 + q])))

    flip = set(faults.check_flips)
    reported: list[int] = []
    for v in range(d1):
        op = x_pauli(b1.column(v).concat(g1.column(v)))
        eps = t.measure(op, rng)
        reported.append(-eps if v in flip else eps)

    logical = tuple(
        prod(reported[v] for v in pre.support()) for pre in plan.preimages
    )

    omega: list[int] = []
    for e in range(d0):
        omega.append(t.measure(z_pauli(BitVector.from_support(t.n, [e])), rng))
    omega_bits = BitVector.from_bits([1 if w == -1 else 0 for w in omega])
    vprime = f2.solve(b1, omega_bits)
    if vprime is None:  # pragma: no cover - boundary image by construction
        raise RuntimeError("ancilla Z outcomes left the boundary image")
    t.apply_pauli(x_pauli((b1 @ vprime).concat(g1 @ vprime)))

    out = t.drop_front_qubits(d0)
    return RunRecord(logical, tuple(reported), tuple(omega), out)


# ---------------------------------------------------------------------------
# exhaustive fault scanning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanReport:
    """Exhaustive classification of all fault sets up to a weight cutoff."""

    w_max: int
    runs: int
    detected: int
    benign: int
    corrupting: tuple[tuple[int, ...], ...] = field(default=())

    @property
    def undetectable_corrupting(self) -> int:
        return len(self.corrupting)


def _classify(record: RunRecord, b2t: BitMatrix, hx_rows: list[BitVector]) -> str:
    eps_bits = BitVector.from_bits([1 if e == -1 else 0 for e in record.check_outcomes])
    for w in range(b2t.rows):
        if b2t.row(w).dot(eps_bits):
            return "detected"
    for row in hx_rows:
        val = record.tableau.expectation(x_pauli(row))
        if val == 0:  # pragma: no cover - X checks have definite signs here
            raise AssertionError("base X check has no definite value after the run")
        if val == -1:
            return "detected"
    if any(s == -1 for s in record.logical_outcomes):
        return "corrupting"
    return "benign"


def classify_run(record: RunRecord, merged: MergedCode) -> str:
    """Verdict for a run whose fault-free logical outcomes are all +1.

    "detected" when a meta parity fails or a base X check comes out
    negative afterwards; otherwise "corrupting" when a logical outcome is
    flipped; otherwise "benign".
    """
    _, b2t, _ = _gadget_blocks(merged)
    hx_base = merged.base.boundary_in(merged.qubit_degree).T
    return _classify(record, b2t, [hx_base.row(i) for i in range(hx_base.rows)])


def exhaustive_fault_scan(
    plan: SurgeryPlan, merged: MergedCode, w_max: int, seed: int = 0
) -> ScanReport:
    """Replay the protocol under every fault set of weight <= w_max.

    The input state is steered into the +1 eigenspace of every measured
    logical, so the fault-free logical outcomes are all +1 and any -1 in an
    undetected run is a corruption.  Every verdict is cross-checked against
    the algebraic one-round fault model; a mismatch raises RuntimeError.
    """
    b1, b2t, _ = _gadget_blocks(merged)
    d1, d0 = b1.cols, b1.rows
    n_c = merged.base.dim(merged.qubit_degree)
    hx_base = merged.base.boundary_in(merged.qubit_degree).T
    hx_rows = [hx_base.row(i) for i in range(hx_base.rows)]
    det, cor = _fault_effect_matrices(merged, plan)

    base_state = prepare_code_state(hx_base, np.random.default_rng([seed, 0]))
    for h in plan.basis:
        base_state.measure_to(x_pauli(h), 1, np.random.default_rng([seed, 1]))

    n_loc = d1 + d0 + n_c
    runs = detected = benign = 0
    corrupting: list[tuple[int, ...]] = []
    for w in range(w_max + 1):
        for locs in combinations(range(n_loc), w):
            faults = FaultSet.from_locations(merged, locs)
            rng = np.random.default_rng([seed, 2, runs])
            record = run_fast_surgery(base_state.copy(), plan, merged, rng, faults)
            verdict = _classify(record, b2t, hx_rows)

            det_bits = BitVector.zeros(det.cols)
            cor_bits = BitVector.zeros(cor.cols)
            for loc in locs:
                det_bits = det_bits ^ det.row(loc)
                cor_bits = cor_bits ^ cor.row(loc)
            expected = (
                "detected"
                if not det_bits.is_zero()
                else ("corrupting" if not cor_bits.is_zero() else "benign")
            )
            if verdict != expected:
                raise RuntimeError(
                    f"simulation says {verdict} but the algebraic model says "
                    f"{expected} for fault locations {locs}"
                )
            runs += 1
            if verdict == "detected":
                detected += 1
            elif verdict == "benign":
                benign += 1
            else:
                corrupting.append(locs)
    return ScanReport(w_max, runs, detected, benign, tuple(corrupting))
