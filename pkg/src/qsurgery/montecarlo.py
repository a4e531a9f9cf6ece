"""Phenomenological-noise Monte Carlo for merged-code measurement schemes.

Each experiment runs a merged code for a number of noisy syndrome rounds:
every qubit picks up an independent Z flip per round and every X-check
readout an independent flip, both with probability p.  One decoding matrix
covers the whole history (single-stage decoding: the meta checks sit inside
the parity-check matrix handed to the decoder), corrections come from
``decoder.decode_batch``, and a shot fails when any tracked observable —
an unmeasured logical or an inferred joint-measurement outcome — ends up
flipped.

Detector convention.  The first round of ancilla checks *defines* the
measurement frame: their outcomes are fresh projections with no prior
reference, so round one contributes detector rows only for the base-code
checks (whose syndrome is known to be zero on a code state).  Rounds two
onward compare full reported syndromes between consecutive rounds.  Meta
checks constrain every round's reported ancilla values, including the
first.  The final perfect readout sees the surviving base code only — the
ancilla system is consumed by the protocol, so its checks are never
re-measured noiselessly.  This is what makes a one-round standard merge
vulnerable: an ancilla readout flip touches no detector at all.

Sampling is split into fixed-size chunks with seeds derived as
(seed, rate index, chunk index), so results are independent of the worker
count and bit-identical across runs.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import f2, formats, gadgets, multicycle
from .csscode import logical_basis
from .decoder import DecoderConfig, decode_batch
from .f2 import BitMatrix, BitVector
from .surgery import MergedCode, SurgeryPlan, build_plan, total_complex

__all__ = [
    "WILSON_Z99",
    "CHUNK_SHOTS",
    "THREADS_ENV",
    "Experiment",
    "ShotStats",
    "FitResult",
    "DecodingTemplate",
    "build_decoding_matrix",
    "build_observables",
    "wilson_interval",
    "shot_stats",
    "run",
    "stats_rows",
    "loglog_fit",
    "scheme_label",
    "experiment_from_settings",
    "case_study_experiments",
]

WILSON_Z99 = 2.5758293035489004  # two-sided 99% normal quantile
CHUNK_SHOTS = 2048
THREADS_ENV = "QSURGERY_THREADS"


@dataclass(frozen=True)
class Experiment:
    """One scheme's sampling job: merged code, plan, rounds, rates, seed."""

    scheme: str
    merged: MergedCode
    plan: SurgeryPlan
    rounds: int
    physical_rates: tuple[float, ...]
    shots: int
    seed: int

    def __post_init__(self):
        object.__setattr__(
            self, "physical_rates", tuple(float(p) for p in self.physical_rates)
        )
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if not self.physical_rates:
            raise ValueError("physical_rates is empty")
        if any(not 0.0 < p < 0.5 for p in self.physical_rates):
            raise ValueError(
                f"physical rates must lie in (0, 0.5): {self.physical_rates}"
            )
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")


@dataclass(frozen=True)
class ShotStats:
    """Failure tally for one physical rate, with a 99% Wilson interval."""

    p: float
    shots: int
    failures: int
    rate: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    insufficient: bool


@dataclass(frozen=True)
class DecodingTemplate:
    """Detector matrix over per-round error variables.

    Variables are ordered (qubit flips round 1..R, readout flips round
    1..R); ``priors(p)`` fills every column with the physical rate.
    """

    matrix: BitMatrix
    rounds: int
    n_qubits: int
    n_checks: int

    @property
    def variables(self) -> int:
        return self.rounds * (self.n_qubits + self.n_checks)

    def priors(self, p: float) -> np.ndarray:
        return np.full(self.variables, float(p))

    def qubit_block(self, t: int) -> slice:
        return slice(t * self.n_qubits, (t + 1) * self.n_qubits)

    def check_block(self, t: int) -> slice:
        start = self.rounds * self.n_qubits
        return slice(start + t * self.n_checks, start + (t + 1) * self.n_checks)


def build_decoding_matrix(
    merged: MergedCode, plan: SurgeryPlan, rounds: int
) -> DecodingTemplate:
    """Single-stage detector matrix for ``rounds`` noisy syndrome rounds.

    Row blocks: round-one base-check detectors [H_base | I_base], full
    difference detectors [H | I_t + I_{t-1}] for later rounds, meta rows
    [0 | M] per round, and the perfect final base readout applied to the
    accumulated qubit error.  The plan does not enter the detector matrix;
    it is accepted so templates and observables are built from one signature.
    """
    del plan
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    hx = merged.code.hx.to_dense()
    r, n = hx.shape
    d1 = merged.ancilla_x_checks
    base = np.arange(d1, r)
    nvars = rounds * (n + r)
    mstart = rounds * n

    blocks: list[np.ndarray] = []
    first = np.zeros((base.size, nvars), np.uint8)
    first[:, :n] = hx[base]
    first[np.arange(base.size), mstart + base] = 1
    blocks.append(first)
    for t in range(1, rounds):
        blk = np.zeros((r, nvars), np.uint8)
        blk[:, t * n : (t + 1) * n] = hx
        idx = np.arange(r)
        blk[idx, mstart + t * r + idx] = 1
        blk[idx, mstart + (t - 1) * r + idx] = 1
        blocks.append(blk)
    if merged.code.mx is not None and merged.code.mx.rows:
        mx = merged.code.mx.to_dense()
        for t in range(rounds):
            blk = np.zeros((mx.shape[0], nvars), np.uint8)
            blk[:, mstart + t * r : mstart + (t + 1) * r] = mx
            blocks.append(blk)
    final = np.zeros((base.size, nvars), np.uint8)
    for t in range(rounds):
        final[:, t * n : (t + 1) * n] = hx[base]
    blocks.append(final)

    matrix = BitMatrix.from_dense(np.vstack(blocks))
    return DecodingTemplate(matrix, rounds, n, r)


def _data_logical_basis(merged: MergedCode) -> list[BitVector]:
    """Merged X-logical representatives cleaned to zero ancilla support."""
    d0 = merged.ancilla_qubits
    hx = merged.code.hx
    anc_part = BitMatrix.from_dense(hx.to_dense()[:, :d0]).T
    out = []
    for rep in logical_basis(merged.code, "X"):
        on_anc = BitVector.from_dense(rep.to_dense()[:d0])
        if not on_anc.is_zero():
            y = f2.solve(anc_part, on_anc)
            if y is None:  # pragma: no cover - survivors restrict to the data block
                raise AssertionError("logical representative stuck on the ancilla block")
            rep = rep ^ (hx.T @ y)
        out.append(rep)
    return out


def build_observables(merged: MergedCode, plan: SurgeryPlan) -> BitMatrix:
    """Failure functionals over one round block: [qubit columns | readout columns].

    One row per surviving logical (a data-supported representative, zero on
    the readout columns) and one per measured logical: the inferred outcome
    flips with readouts on the plan's preimage checks and with qubit errors
    on the support of the corresponding check product.
    """
    hx = merged.code.hx
    n, r = hx.cols, hx.rows
    rows: list[np.ndarray] = []
    for rep in _data_logical_basis(merged):
        row = np.zeros(n + r, np.uint8)
        row[:n] = rep.to_dense()
        rows.append(row)
    for pre in plan.preimages:
        prod = BitVector.zeros(n)
        for v in pre.support():
            prod = prod ^ hx.row(v)
        row = np.zeros(n + r, np.uint8)
        row[:n] = prod.to_dense()
        row[n + np.asarray(pre.support(), dtype=np.int64)] = 1
        rows.append(row)
    return BitMatrix.from_dense(np.array(rows, np.uint8).reshape(len(rows), n + r))


def _unrolled_observables(
    obs: BitMatrix, template: DecodingTemplate
) -> np.ndarray:
    """Tile one-block observables over the per-round variable layout.

    Qubit errors from every round persist to the end, so the qubit part
    repeats in each round block; outcomes are inferred from the last noisy
    round, so the readout part lands on that round's block only.
    """
    dense = obs.to_dense()
    n, r = template.n_qubits, template.n_checks
    out = np.zeros((dense.shape[0], template.variables), np.uint8)
    for t in range(template.rounds):
        out[:, template.qubit_block(t)] = dense[:, :n]
    out[:, template.check_block(template.rounds - 1)] = dense[:, n:]
    return out


def wilson_interval(
    failures: int, shots: int, z: float = WILSON_Z99
) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if not 0 <= failures <= shots:
        raise ValueError(f"need 0 <= failures <= shots, got {failures}/{shots}")
    denom = shots + z * z
    center = (failures + z * z / 2.0) / denom
    half = z * math.sqrt(failures * (shots - failures) / shots + z * z / 4.0) / denom
    # the score region touches the ends exactly on degenerate tallies; don't
    # let floating point pull the endpoints inward
    low = 0.0 if failures == 0 else max(center - half, 0.0)
    high = 1.0 if failures == shots else min(center + half, 1.0)
    return low, high


def shot_stats(p: float, shots: int, failures: int) -> ShotStats:
    lo, hi = wilson_interval(failures, shots)
    return ShotStats(float(p), shots, failures, failures / shots, lo, hi)


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    raw = os.environ.get(THREADS_ENV, "").strip()
    return max(1, int(raw)) if raw else 1


def run(
    exp: Experiment,
    config: DecoderConfig | None = None,
    *,
    decode: bool = True,
    threads: int | None = None,
) -> tuple[ShotStats, ...]:
    """Sample, decode, and tally failures for each physical rate.

    ``decode=False`` skips correction entirely (identity decoder) — the
    no-decoding baseline used as a sanity anchor.  Results do not depend on
    the thread count: chunk c of rate index i always draws from the stream
    seeded (seed, i, c).
    """
    template = build_decoding_matrix(exp.merged, exp.plan, exp.rounds)
    obs = _unrolled_observables(build_observables(exp.merged, exp.plan), template)
    obs_t = obs.T.astype(np.int64)
    det_t = template.matrix.to_dense().T.astype(np.int64)
    nvars = template.variables
    rates = sorted(exp.physical_rates)
    workers = _thread_count(threads)

    def one_chunk(rate_index: int, p: float, chunk: int, count: int) -> int:
        rng = np.random.default_rng((exp.seed, rate_index, chunk))
        errors = (rng.random((count, nvars)) < p).astype(np.uint8)
        if decode:
            syndromes = (errors.astype(np.int64) @ det_t) % 2
            corrections = decode_batch(
                template.matrix, template.priors(p), syndromes, config
            )
            residual = errors ^ corrections
        else:
            residual = errors
        flips = (residual.astype(np.int64) @ obs_t) % 2
        return int(flips.any(axis=1).sum())

    out = []
    for i, p in enumerate(rates):
        chunks = [
            (c, min(CHUNK_SHOTS, exp.shots - c * CHUNK_SHOTS))
            for c in range((exp.shots + CHUNK_SHOTS - 1) // CHUNK_SHOTS)
        ]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                failures = sum(
                    pool.map(lambda cc: one_chunk(i, p, cc[0], cc[1]), chunks)
                )
        else:
            failures = sum(one_chunk(i, p, c, cnt) for c, cnt in chunks)
        out.append(shot_stats(p, exp.shots, failures))
    return tuple(out)


def stats_rows(exp: Experiment, stats: tuple[ShotStats, ...]) -> list[dict[str, object]]:
    """CSV rows (sorted by rate) in the results-table column order."""
    rows = []
    for s in sorted(stats, key=lambda s: s.p):
        rows.append(
            {
                "scheme": exp.scheme,
                "rounds": exp.rounds,
                "p": s.p,
                "shots": s.shots,
                "failures": s.failures,
                "rate": s.rate,
                "ci_low": s.ci_low,
                "ci_high": s.ci_high,
            }
        )
    return rows


def loglog_fit(stats: tuple[ShotStats, ...] | list[ShotStats]) -> FitResult:
    """Least squares of log(rate) against log(p) over nonzero-failure points.

    slope = sum((x - mean x)(y - mean y)) / sum((x - mean x)^2) in double
    precision, intercept = mean y - slope * mean x; flagged insufficient
    with fewer than two usable points (or a degenerate rate grid).
    """
    pts = [(s.p, s.rate) for s in stats if s.failures > 0]
    if len(pts) < 2:
        return FitResult(math.nan, math.nan, True)
    x = np.log(np.array([p for p, _ in pts]))
    y = np.log(np.array([r for _, r in pts]))
    dx = x - x.mean()
    denom = float(dx @ dx)
    if denom == 0.0:
        return FitResult(math.nan, math.nan, True)
    slope = float(dx @ (y - y.mean())) / denom
    return FitResult(slope, float(y.mean() - slope * x.mean()), False)


# ---------------------------------------------------------------------------
# canonical schemes
# ---------------------------------------------------------------------------


def scheme_label(family: str, rounds: int) -> str:
    return f"{family}-{rounds}-round" + ("s" if rounds != 1 else "")


def _family_merge(family: str) -> tuple[MergedCode, SurgeryPlan]:
    code, recipe = multicycle.case_study()
    if family == "fast":
        _, m = gadgets.build_gadget(code, recipe)
    elif family == "standard":
        _, m = gadgets.gauging_gadget(code, multicycle.x_logical())
    else:
        raise ValueError(
            f"unknown scheme family {family!r}; expected 'fast' or 'standard'"
        )
    return total_complex(m), build_plan(m)


def experiment_from_settings(settings: formats.ExperimentSettings) -> Experiment:
    """Instantiate the merge named by an experiment file.

    The scheme may be a family name ('fast', 'standard') or a full label
    like 'standard-3-rounds'; a full label must agree with the rounds key.
    """
    family = settings.scheme.split("-", 1)[0]
    label = scheme_label(family, settings.rounds)
    if settings.scheme not in (family, label):
        raise formats.FormatError(
            f"scheme {settings.scheme!r} does not match rounds={settings.rounds} "
            f"(expected {family!r} or {label!r})"
        )
    merged, plan = _family_merge(family)
    return Experiment(
        label, merged, plan, settings.rounds, settings.rates, settings.shots,
        settings.seed,
    )


def case_study_experiments(
    rates: tuple[float, ...], shots: int, seed: int
) -> tuple[Experiment, Experiment, Experiment]:
    """The three curves of the numerical study, sharing one rate grid."""
    fast_merged, fast_plan = _family_merge("fast")
    std_merged, std_plan = _family_merge("standard")
    return (
        Experiment(scheme_label("fast", 1), fast_merged, fast_plan, 1, rates, shots, seed),
        Experiment(scheme_label("standard", 3), std_merged, std_plan, 3, rates, shots, seed),
        Experiment(scheme_label("standard", 1), std_merged, std_plan, 1, rates, shots, seed),
    )
