"""Belief propagation with ordered-statistics post-processing over GF(2).

Syndrome decoding for the Monte Carlo study: product-sum message passing in
the log-likelihood domain on the Tanner graph of a parity-check matrix,
followed by an ordered-statistics solve when message passing fails to
reproduce the syndrome.  The message kernels are batched over shots — all
per-edge work is vectorized with cumulative-sum segment reductions — and the
ordered-statistics stage runs per unconverged shot.

Conventions: positive log-likelihood ratios favour "no error"; everything is
clamped to ±`LLR_CLAMP`; ties in reliability orderings break by column
index, making every output deterministic for a fixed problem and config.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import f2
from .f2 import BitMatrix, BitVector

__all__ = [
    "LLR_CLAMP",
    "InvalidSyndromeError",
    "DecodingProblem",
    "DecoderConfig",
    "BpResult",
    "DecodeResult",
    "bp",
    "bp_batch",
    "osd",
    "decode",
    "decode_batch",
]

LLR_CLAMP = 30.0
_TINY = 1e-30

SCHEDULES = ("parallel", "serial")


class InvalidSyndromeError(ValueError):
    """The syndrome is not in the column space of the check matrix."""


@dataclass(frozen=True)
class DecodingProblem:
    """One syndrome-decoding instance: matrix, per-column priors, syndrome."""

    check_matrix: BitMatrix
    priors: np.ndarray
    syndrome: BitVector

    def __post_init__(self):
        p = np.asarray(self.priors, dtype=float)
        object.__setattr__(self, "priors", p)
        if p.shape != (self.check_matrix.cols,):
            raise ValueError(
                f"priors have shape {p.shape}, expected ({self.check_matrix.cols},)"
            )
        if not ((p > 0.0) & (p <= 0.5)).all():
            raise ValueError("priors must lie in (0, 0.5]")
        if len(self.syndrome) != self.check_matrix.rows:
            raise ValueError(
                f"syndrome has length {len(self.syndrome)}, "
                f"expected {self.check_matrix.rows}"
            )


@dataclass(frozen=True)
class DecoderConfig:
    max_iterations: int = 30
    schedule: str = "parallel"
    osd_order: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}")
        if self.osd_order < 0:
            raise ValueError("osd_order must be >= 0")


@dataclass(frozen=True)
class BpResult:
    marginals: np.ndarray
    converged: bool
    hard_decision: BitVector
    iterations: int


@dataclass(frozen=True)
class DecodeResult:
    correction: BitVector
    converged: bool
    iterations: int


# ---------------------------------------------------------------------------
# batched message passing
# ---------------------------------------------------------------------------


class _Graph:
    """Edge lists of the Tanner graph, in row-major and column-major order."""

    def __init__(self, h: BitMatrix):
        dense = h.to_dense()
        self.rows, self.cols = dense.shape
        re, ce = np.nonzero(dense)
        self.edge_row = re
        self.edge_col = ce
        self.n_edges = re.size
        self.row_start = np.searchsorted(re, np.arange(self.rows))
        self.row_end = np.append(self.row_start[1:], self.n_edges)
        self.row_len = self.row_end - self.row_start
        order = np.lexsort((re, ce))
        self.col_order = order
        ce_sorted = ce[order]
        self.col_start = np.searchsorted(ce_sorted, np.arange(self.cols))
        self.col_end = np.append(self.col_start[1:], self.n_edges)


def _segment_sum(a: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Sum of a[:, starts[i]:ends[i]] per segment; empty segments give 0."""
    c = np.zeros((a.shape[0], a.shape[1] + 1), dtype=np.float64)
    np.cumsum(a, axis=1, out=c[:, 1:])
    return c[:, ends] - c[:, starts]


def _check_messages(q, g: _Graph, syndromes, sl=None):
    """Product-sum check-to-variable messages with exact zero handling.

    ``q`` holds variable-to-check messages in row-major edge order (a whole
    graph, or one row's slice when ``sl`` selects it).  Magnitudes travel in
    log space; signs and exact zeros are counted separately so a single
    zeroed message zeroes exactly the other messages of its check.
    """
    if sl is None:
        starts, ends, lens = g.row_start, g.row_end, g.row_len
    else:
        starts = np.array([0])
        ends = np.array([q.shape[1]])
        lens = ends
    t = np.tanh(np.clip(q, -LLR_CLAMP, LLR_CLAMP) / 2.0)
    neg = (t < 0).astype(np.float64)
    zero = (np.abs(t) < _TINY).astype(np.float64)
    logmag = np.log(np.where(zero > 0, 1.0, np.abs(t)))
    log_ex = np.repeat(_segment_sum(logmag, starts, ends), lens, axis=1) - logmag
    neg_ex = np.repeat(_segment_sum(neg, starts, ends), lens, axis=1) - neg
    zero_ex = np.repeat(_segment_sum(zero, starts, ends), lens, axis=1) - zero
    syn_e = np.repeat(syndromes, lens, axis=1)
    sign = 1.0 - 2.0 * ((neg_ex + syn_e) % 2)
    mag = np.where(zero_ex > 0, 0.0, np.exp(log_ex))
    prod = sign * np.minimum(mag, 1.0 - 1e-12)
    return np.clip(2.0 * np.arctanh(prod), -LLR_CLAMP, LLR_CLAMP)


def _syndromes_of(hard, g: _Graph) -> np.ndarray:
    bits = hard[:, g.edge_col].astype(np.float64)
    return _segment_sum(bits, g.row_start, g.row_end).astype(np.int64) % 2


def bp_batch(
    check_matrix: BitMatrix,
    priors: np.ndarray,
    syndromes: np.ndarray,
    config: DecoderConfig | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Message passing over a batch of syndromes.

    ``syndromes`` is a (shots, rows) 0/1 array.  Returns (marginals,
    converged, hard_decisions, iterations), each with a leading shot axis.
    Shots freeze at their first syndrome-consistent hard decision.
    """
    config = config or DecoderConfig()
    g = _Graph(check_matrix)
    syndromes = np.asarray(syndromes, dtype=np.int64)
    if syndromes.ndim != 2 or syndromes.shape[1] != g.rows:
        raise ValueError(f"syndromes must have shape (shots, {g.rows})")
    batch = syndromes.shape[0]
    p = np.asarray(priors, dtype=float)
    llr0 = np.clip(np.log((1.0 - p) / p), -LLR_CLAMP, LLR_CLAMP)

    marg = np.broadcast_to(llr0, (batch, g.cols)).copy()
    hard = (marg < 0).astype(np.int64)
    done = ~(_syndromes_of(hard, g) ^ syndromes).any(axis=1)
    iters = np.zeros(batch, dtype=np.int64)

    if g.n_edges == 0 or done.all():
        return marg, done, hard, iters

    syn_f = syndromes.astype(np.float64)
    r = np.zeros((batch, g.n_edges), dtype=np.float64)
    if config.schedule == "parallel":
        q = np.broadcast_to(llr0[g.edge_col], (batch, g.n_edges)).copy()
    for it in range(1, config.max_iterations + 1):
        live = ~done
        if config.schedule == "parallel":
            r_new = _check_messages(q, g, syn_f)
            rc = r_new[:, g.col_order]
            col_sum = _segment_sum(rc, g.col_start, g.col_end)
            m_new = llr0[None, :] + col_sum
            q_new = np.clip(
                m_new[:, g.edge_col] - r_new, -LLR_CLAMP, LLR_CLAMP
            )
            r[live] = r_new[live]
            q[live] = q_new[live]
            marg[live] = m_new[live]
        else:
            for i in range(g.rows):
                sl = slice(g.row_start[i], g.row_end[i])
                ci = g.edge_col[sl]
                if ci.size == 0:
                    continue
                q_i = np.clip(marg[:, ci] - r[:, sl], -LLR_CLAMP, LLR_CLAMP)
                r_i = _check_messages(q_i, g, syn_f[:, i : i + 1], sl=sl)
                delta = np.where(live[:, None], r_i - r[:, sl], 0.0)
                upd = marg[:, ci] + delta
                marg[:, ci] = np.clip(upd, -2 * LLR_CLAMP, 2 * LLR_CLAMP)
                r[live, sl] = r_i[live]
        hard_new = (marg < 0).astype(np.int64)
        hard[live] = hard_new[live]
        ok = ~(_syndromes_of(hard, g) ^ syndromes).any(axis=1)
        newly = live & ok
        iters[newly] = it
        done |= ok
        if done.all():
            break
    iters[~done] = config.max_iterations
    return marg, done, hard, iters


def bp(problem: DecodingProblem, config: DecoderConfig | None = None) -> BpResult:
    """Product-sum message passing for a single problem."""
    marg, conv, hard, iters = bp_batch(
        problem.check_matrix,
        problem.priors,
        problem.syndrome.to_dense()[None, :].astype(np.int64),
        config,
    )
    return BpResult(
        marg[0], bool(conv[0]), BitVector.from_dense(hard[0].astype(np.uint8)),
        int(iters[0]),
    )


# ---------------------------------------------------------------------------
# ordered statistics
# ---------------------------------------------------------------------------


class _Elimination:
    """Row reduction of the check matrix under one column ordering."""

    def __init__(self, h: BitMatrix, order: np.ndarray):
        self.order = order
        dense = h.to_dense()[:, order]
        aug = BitMatrix.hstack(
            [BitMatrix.from_dense(dense), BitMatrix.identity(h.rows)]
        )
        rr, piv = f2.rref(aug)
        dense_rr = rr.to_dense()
        self.n_cols = h.cols
        self.pivot_rows = [k for k, c in enumerate(piv) if c < h.cols]
        self.pivot_cols = np.array(
            [c for c in piv if c < h.cols], dtype=np.int64
        )
        self.reduced = dense_rr[self.pivot_rows, : h.cols]
        self.transform = dense_rr[:, h.cols :]
        self.check_rows = [k for k, c in enumerate(piv) if c >= h.cols]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Pivot-column solution with all free columns zero (sorted coords)."""
        b = (self.transform @ rhs) % 2
        if b[self.check_rows].any():
            raise InvalidSyndromeError(
                "syndrome is outside the column space of the check matrix"
            )
        x = np.zeros(self.n_cols, dtype=np.int64)
        x[self.pivot_cols] = b[self.pivot_rows]
        return x


def osd(
    problem: DecodingProblem,
    marginals: np.ndarray,
    config: DecoderConfig | None = None,
) -> BitVector:
    """Ordered-statistics solve seeded by the message-passing marginals.

    Columns are ordered most-error-prone first (ascending marginal, ties by
    index); elimination picks the pivot set and solves it exactly against
    the syndrome.  Order λ re-solves with every subset of the λ most
    suspicious free columns forced to 1 and keeps the lightest correction,
    breaking ties toward the plain solve and earlier subsets.
    """
    config = config or DecoderConfig()
    h = problem.check_matrix
    marginals = np.asarray(marginals, dtype=float)
    if marginals.shape != (h.cols,):
        raise ValueError(f"marginals must have shape ({h.cols},)")
    order = np.lexsort((np.arange(h.cols), marginals))
    elim = _Elimination(h, order)
    s = problem.syndrome.to_dense().astype(np.int64)

    best = elim.solve(s)
    best_w = int(best.sum())
    if config.osd_order > 0:
        h_sorted = h.to_dense()[:, order].astype(np.int64)
        free = np.setdiff1d(
            np.arange(h.cols), elim.pivot_cols, assume_unique=True
        )
        tail = free[: config.osd_order]  # most suspicious free columns
        for k in range(1, len(tail) + 1):
            for subset in combinations(range(len(tail)), k):
                pattern_cols = tail[list(subset)]
                rhs = (s + h_sorted[:, pattern_cols].sum(axis=1)) % 2
                x = elim.solve(rhs)
                x[pattern_cols] ^= 1
                w = int(x.sum())
                if w < best_w:
                    best, best_w = x, w
    out = np.zeros(h.cols, dtype=np.uint8)
    out[order] = best.astype(np.uint8)
    return BitVector.from_dense(out)


def decode(
    problem: DecodingProblem, config: DecoderConfig | None = None
) -> DecodeResult:
    """Message passing first; ordered statistics when it fails to converge."""
    config = config or DecoderConfig()
    res = bp(problem, config)
    if res.converged:
        return DecodeResult(res.hard_decision, True, res.iterations)
    return DecodeResult(osd(problem, res.marginals, config), False, res.iterations)


def decode_batch(
    check_matrix: BitMatrix,
    priors: np.ndarray,
    syndromes: np.ndarray,
    config: DecoderConfig | None = None,
) -> np.ndarray:
    """Corrections for a batch of syndromes as a (shots, cols) 0/1 array."""
    config = config or DecoderConfig()
    marg, conv, hard, _ = bp_batch(check_matrix, priors, syndromes, config)
    out = hard.astype(np.uint8)
    for i in np.nonzero(~conv)[0]:
        problem = DecodingProblem(
            check_matrix,
            priors,
            BitVector.from_dense(np.asarray(syndromes[i], dtype=np.uint8)),
        )
        out[i] = osd(problem, marg[i], config).to_dense()
    return out
