"""Monte Carlo machinery pinned by exact enumeration and closed forms.

Oracles
-------
``character_sum_failure`` gives the no-correction failure probability in
closed form: averaging (-1)^(u . O e) over all sign vectors u turns
P(O e = 0) into 2^-R * sum_u (1 - 2p)^|u^T O|, so nothing is sampled.

``failure_probability_by_enumeration`` walks every error pattern up to a
weight cutoff through syndrome extraction, ``decode_batch``, and the
observable check, accumulating exact binomial probabilities.  It shares the
decoder (which has its own reference tests) but none of the sampling,
chunking, or tallying code it is used to pin; the returned tail bound is the
binomial mass above the cutoff, kept far below the comparison tolerance.

``wilson_by_bisection`` finds the endpoints of the score region
{q : (phat - q)^2 * n <= z^2 q (1 - q)} by bisecting the defining
inequality, with no algebra shared with the closed form under test.

Statistical comparisons use 4.9-sigma tolerances (false-alarm odds < 1e-6),
and every sampled quantity is produced from a pinned seed, so reruns are
bit-identical.
"""

from __future__ import annotations

import math
from functools import cache
from itertools import combinations

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qsurgery import csscode, f2, formats, gadgets, surgery
from qsurgery import montecarlo as mc
from qsurgery.decoder import DecoderConfig, decode_batch
from qsurgery.f2 import BitMatrix
from test_csscode import steane
from test_surgery import rep3_path_map

# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def character_sum_failure(obs: np.ndarray, p: float) -> float:
    """P(any observable flips) for raw iid flips, via a 2^rows character sum."""
    masks = []
    for row in obs:
        m = 0
        for j, b in enumerate(row):
            if int(b):
                m |= 1 << j
        masks.append(m)
    total = 0.0
    for u in range(1 << len(masks)):
        combo = 0
        for i, m in enumerate(masks):
            if (u >> i) & 1:
                combo ^= m
        total += (1.0 - 2.0 * p) ** combo.bit_count()
    return 1.0 - total / (1 << len(masks))


def failure_probability_by_enumeration(
    template, obs: np.ndarray, p: float, *, wmax: int, decode: bool = True,
    config=None,
):
    """Exact failure probability from all patterns of weight <= wmax.

    Returns (probability, truncation bound, failing patterns).  The bound is
    the total binomial mass of the ignored weights, so the true probability
    lies within it of the returned value.
    """
    nv = template.variables
    pats = []
    for w in range(wmax + 1):
        for pos in combinations(range(nv), w):
            v = np.zeros(nv, np.uint8)
            v[list(pos)] = 1
            pats.append(v)
    errors = np.array(pats, np.uint8)
    if decode:
        det_t = template.matrix.to_dense().T.astype(np.int64)
        syndromes = ((errors.astype(np.int64) @ det_t) % 2).astype(np.uint8)
        corrections = decode_batch(
            template.matrix, template.priors(p), syndromes, config
        )
        residual = errors ^ corrections
    else:
        residual = errors
    flips = (residual.astype(np.int64) @ obs.T.astype(np.int64)) % 2
    failing = flips.any(axis=1)
    weights = errors.sum(axis=1).astype(np.int64)
    prob = float(np.sum(failing * p**weights * (1.0 - p) ** (nv - weights)))
    tail = 1.0 - sum(
        math.comb(nv, w) * p**w * (1.0 - p) ** (nv - w) for w in range(wmax + 1)
    )
    return prob, tail, errors[failing]


def wilson_by_bisection(failures: int, shots: int, z: float = mc.WILSON_Z99):
    phat = failures / shots

    def inside(q: float) -> bool:
        return (phat - q) ** 2 * shots <= z * z * q * (1.0 - q)

    def edge(lo: float, hi: float, want_inside_high: bool) -> float:
        # invariant: inside() differs between lo and hi
        for _ in range(200):
            mid = (lo + hi) / 2.0
            if inside(mid) == want_inside_high:
                hi = mid
            else:
                lo = mid
        return (lo + hi) / 2.0

    low = 0.0 if inside(0.0) else edge(0.0, phat, True)
    high = 1.0 if inside(1.0) else edge(phat, 1.0, False)
    return low, high


def unroll(obs: np.ndarray, template) -> np.ndarray:
    """Tile qubit columns over every round; readouts land on the last round."""
    n, r = template.n_qubits, template.n_checks
    out = np.zeros((obs.shape[0], template.variables), np.uint8)
    for t in range(template.rounds):
        out[:, t * n : (t + 1) * n] = obs[:, :n]
    start = template.rounds * n + (template.rounds - 1) * r
    out[:, start : start + r] = obs[:, n:]
    return out


# ---------------------------------------------------------------------------
# fixtures (cached; all construction goes through public entry points)
# ---------------------------------------------------------------------------


@cache
def rep3_merge():
    """Tiny gauging merge of the 3-qubit repetition code: no base X checks."""
    _, _, m = rep3_path_map()
    return surgery.total_complex(m), surgery.build_plan(m)


@cache
def steane_merge():
    """Gauging merge of Steane's code; its ancilla readouts have no metas."""
    code = steane()
    rep = csscode.logical_basis(code, "X")[0]
    _, m = gadgets.gauging_gadget(code, rep)
    return surgery.total_complex(m), surgery.build_plan(m)


@cache
def case_experiments():
    return mc.case_study_experiments((3e-3, 1e-2), shots=1, seed=0)


def case_merge(scheme: str):
    for e in case_experiments():
        if e.scheme.startswith(scheme):
            return e.merged, e.plan
    raise AssertionError(scheme)


def toy_experiment(merged, plan, rounds, rates, shots, seed=11) -> mc.Experiment:
    return mc.Experiment("toy", merged, plan, rounds, rates, shots, seed)


# ---------------------------------------------------------------------------
# decoding template layout
# ---------------------------------------------------------------------------


def dense_template(merged, rounds: int) -> np.ndarray:
    """Plain-loop reconstruction of the documented detector row blocks."""
    hx = merged.code.hx.to_dense()
    r, n = hx.shape
    d1 = merged.ancilla_x_checks
    mx = (
        merged.code.mx.to_dense()
        if merged.code.mx is not None
        else np.zeros((0, r), np.uint8)
    )
    nvars = rounds * (n + r)
    mstart = rounds * n
    rows = []
    for i in range(d1, r):  # round one: base checks against a fresh frame
        row = np.zeros(nvars, np.uint8)
        row[:n] = hx[i]
        row[mstart + i] = 1
        rows.append(row)
    for t in range(1, rounds):  # consecutive-round differences, all checks
        for i in range(r):
            row = np.zeros(nvars, np.uint8)
            row[t * n : (t + 1) * n] = hx[i]
            row[mstart + t * r + i] = 1
            row[mstart + (t - 1) * r + i] = 1
            rows.append(row)
    for t in range(rounds):  # meta parities among each round's readouts
        for meta in mx:
            row = np.zeros(nvars, np.uint8)
            row[mstart + t * r : mstart + (t + 1) * r] = meta
            rows.append(row)
    for i in range(d1, r):  # final noiseless readout of the surviving code
        row = np.zeros(nvars, np.uint8)
        for t in range(rounds):
            row[t * n : (t + 1) * n] = hx[i]
        rows.append(row)
    return np.array(rows, np.uint8).reshape(len(rows), nvars)


@pytest.mark.parametrize(
    "fixture,rounds,shape",
    [
        ("fast", 1, (67, 106)),
        ("fast", 2, (122, 212)),
        ("standard", 1, (63, 80)),
        ("standard", 3, (141, 240)),
        ("steane", 1, (6, 16)),
        ("rep3", 1, (0, 8)),
        ("rep3", 2, (3, 16)),
    ],
)
def test_decoding_matrix_matches_plain_loop_blocks(fixture, rounds, shape):
    merged, plan = {
        "fast": lambda: case_merge("fast"),
        "standard": lambda: case_merge("standard"),
        "steane": steane_merge,
        "rep3": rep3_merge,
    }[fixture]()
    template = mc.build_decoding_matrix(merged, plan, rounds)
    assert template.matrix.shape == shape
    assert template.variables == shape[1]
    assert np.array_equal(template.matrix.to_dense(), dense_template(merged, rounds))


def test_template_blocks_and_priors():
    merged, plan = steane_merge()
    template = mc.build_decoding_matrix(merged, plan, 3)
    n, r = merged.code.hx.cols, merged.code.hx.rows
    assert (template.n_qubits, template.n_checks) == (n, r)
    assert template.qubit_block(1) == slice(n, 2 * n)
    assert template.check_block(0) == slice(3 * n, 3 * n + r)
    assert template.check_block(2) == slice(3 * n + 2 * r, 3 * n + 3 * r)
    priors = template.priors(0.013)
    assert priors.shape == (template.variables,)
    assert np.all(priors == 0.013)
    with pytest.raises(ValueError, match="rounds"):
        mc.build_decoding_matrix(merged, plan, 0)


def test_readout_flip_syndromes_follow_the_difference_rule():
    """A lone readout flip at round t fires that round's detectors and the
    difference row that compares round t+1 back to it — nothing else."""
    merged, plan = case_merge("standard")
    rounds = 3
    template = mc.build_decoding_matrix(merged, plan, rounds)
    det = template.matrix.to_dense()
    r = template.n_checks
    d1 = merged.ancilla_x_checks
    base = r - d1
    mx = merged.code.mx.to_dense()
    n_meta = mx.shape[0]
    diff_start = base  # rows: base block, then (rounds-1) difference blocks
    meta_start = base + (rounds - 1) * r
    final_start = meta_start + rounds * n_meta

    for t in range(rounds):
        for i in range(r):
            e = np.zeros(template.variables, np.uint8)
            e[rounds * template.n_qubits + t * r + i] = 1
            syndrome = set(np.flatnonzero((det @ e) % 2))
            expected = set()
            if t == 0 and i >= d1:
                expected.add(i - d1)  # its own round-one base detector
            if t > 0:
                expected.add(diff_start + (t - 1) * r + i)
            if t + 1 < rounds:
                expected.add(diff_start + t * r + i)
            for j in np.flatnonzero(mx[:, i]):
                expected.add(meta_start + t * n_meta + j)
            assert syndrome == expected, (t, i)
            assert all(s < final_start for s in syndrome)  # never the final block


def test_qubit_flip_syndromes_persist_from_their_round():
    """A data error at round t is invisible before t, shows up in round t's
    comparison, cancels in later differences, and reaches the final readout."""
    merged, plan = case_merge("standard")
    rounds = 3
    template = mc.build_decoding_matrix(merged, plan, rounds)
    det = template.matrix.to_dense()
    hx = merged.code.hx.to_dense()
    r, n = hx.shape
    d1 = merged.ancilla_x_checks
    base = r - d1
    diff_start = base
    meta_start = base + (rounds - 1) * r
    mx_rows = merged.code.mx.shape[0]
    final_start = meta_start + rounds * mx_rows

    for t in range(rounds):
        for q in range(n):
            e = np.zeros(template.variables, np.uint8)
            e[t * n + q] = 1
            syndrome = set(np.flatnonzero((det @ e) % 2))
            checks = np.flatnonzero(hx[:, q])
            expected = set()
            for i in checks:
                if t == 0:
                    if i >= d1:
                        expected.add(i - d1)
                else:
                    expected.add(diff_start + (t - 1) * r + i)
                if i >= d1:
                    expected.add(final_start + (i - d1))
            assert syndrome == expected, (t, q)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("fixture", ["rep3", "steane", "fast", "standard"])
def test_observables_tie_back_to_the_surgery_plan(fixture):
    merged, plan = {
        "fast": lambda: case_merge("fast"),
        "standard": lambda: case_merge("standard"),
        "steane": steane_merge,
        "rep3": rep3_merge,
    }[fixture]()
    hx = merged.code.hx
    n, r = hx.cols, hx.rows
    d0 = merged.ancilla_qubits
    obs = mc.build_observables(merged, plan)
    dense = obs.to_dense()
    assert dense.shape == (plan.k_e + len(plan), n + r)

    surviving, measured = dense[: plan.k_e], dense[plan.k_e :]
    assert not surviving[:, n:].any()  # no readout dependence
    assert not surviving[:, :d0].any()  # supported on data qubits only

    for row, rep, pre in zip(measured, plan.basis, plan.preimages):
        assert np.array_equal(np.flatnonzero(row[n:]), np.asarray(pre.support()))
        # the ancilla parts of the product of checks cancel, leaving the
        # planned data representative
        assert not row[:d0].any()
        assert np.array_equal(row[d0:n], rep.to_dense())

    # every row is a well-defined functional: it commutes with all Z checks
    hz = merged.code.hz.to_dense().astype(np.int64)
    assert not ((dense[:, :n].astype(np.int64) @ hz.T) % 2).any()
    # surviving representatives stay logical: independent of the X stabilizers
    stacked = BitMatrix.from_dense(np.vstack([hx.to_dense(), surviving[:, :n]]))
    assert f2.rank(stacked) == f2.rank(hx) + plan.k_e
    # and the full functional set is independent
    assert f2.rank(obs) == dense.shape[0]


def test_case_study_observable_counts():
    for scheme in ("fast", "standard"):
        merged, plan = case_merge(scheme)
        obs = mc.build_observables(merged, plan)
        assert obs.rows == 6  # five surviving logicals + one measured outcome
        assert plan.k_e == 5 and len(plan) == 1


# ---------------------------------------------------------------------------
# single-fault mechanics: why one standard round is not enough
# ---------------------------------------------------------------------------


def test_standard_one_round_ancilla_readouts_hit_no_detector():
    merged, plan = case_merge("standard")
    template = mc.build_decoding_matrix(merged, plan, 1)
    det = template.matrix.to_dense()
    d1 = merged.ancilla_x_checks
    mstart = template.n_qubits
    anc_cols = mstart + np.arange(d1)
    assert not det[:, anc_cols].any()

    # end to end: flipping one preimage readout gives a zero syndrome, the
    # decoder (correctly) does nothing, and the inferred outcome is wrong.
    obs = unroll(mc.build_observables(merged, plan).to_dense(), template)
    v = int(plan.preimages[0].support()[0])
    error = np.zeros((1, template.variables), np.uint8)
    error[0, mstart + v] = 1
    syndrome = (error.astype(np.int64) @ det.T.astype(np.int64)) % 2
    assert not syndrome.any()
    correction = decode_batch(
        template.matrix, template.priors(0.01), syndrome.astype(np.uint8)
    )
    assert not correction.any()
    flips = ((error ^ correction).astype(np.int64) @ obs.T.astype(np.int64)) % 2
    assert flips.any()


@pytest.mark.parametrize(
    "scheme,rounds", [("fast", 1), ("standard", 3)]
)
def test_protected_schemes_correct_every_single_fault(scheme, rounds):
    merged, plan = case_merge(scheme)
    template = mc.build_decoding_matrix(merged, plan, rounds)
    obs = unroll(mc.build_observables(merged, plan).to_dense(), template)
    errors = np.eye(template.variables, dtype=np.uint8)
    det_t = template.matrix.to_dense().T.astype(np.int64)
    syndromes = ((errors.astype(np.int64) @ det_t) % 2).astype(np.uint8)
    corrections = decode_batch(template.matrix, template.priors(0.005), syndromes)
    residual = errors ^ corrections
    flips = (residual.astype(np.int64) @ obs.T.astype(np.int64)) % 2
    assert not flips.any()


# ---------------------------------------------------------------------------
# exact failure probabilities through the full pipeline
# ---------------------------------------------------------------------------


def test_no_correction_baseline_matches_character_sum():
    # tiny merge: enumeration over all 2^8 patterns agrees with the closed
    # form, and the sampler agrees with both
    merged, plan = rep3_merge()
    template = mc.build_decoding_matrix(merged, plan, 1)
    assert template.matrix.rows == 0  # no base X checks -> nothing to decode
    obs = unroll(mc.build_observables(merged, plan).to_dense(), template)
    p = 0.11
    closed = character_sum_failure(obs, p)
    brute, tail, _ = failure_probability_by_enumeration(
        template, obs, p, wmax=template.variables, decode=False
    )
    assert tail < 1e-12
    assert math.isclose(closed, brute, rel_tol=0, abs_tol=1e-12)

    shots = 4096
    (stats,) = mc.run(toy_experiment(merged, plan, 1, (p,), shots), decode=False)
    sigma = math.sqrt(closed * (1 - closed) / shots)
    assert abs(stats.rate - closed) <= 4.9 * sigma


def test_standard_one_round_baseline_matches_character_sum():
    merged, plan = case_merge("standard")
    template = mc.build_decoding_matrix(merged, plan, 1)
    obs = unroll(mc.build_observables(merged, plan).to_dense(), template)
    p, shots = 0.01, 4096
    closed = character_sum_failure(obs, p)
    (stats,) = mc.run(toy_experiment(merged, plan, 1, (p,), shots), decode=False)
    sigma = math.sqrt(closed * (1 - closed) / shots)
    assert abs(stats.rate - closed) <= 4.9 * sigma


def test_sampled_rate_matches_exact_enumeration_with_decoding():
    # Steane gauging merge, one round: its three ancilla readouts are
    # invisible (no metas), so the exact weight-1 failure set is the
    # measured outcome's preimage — the same mechanism the standard
    # one-round scheme suffers at full scale.  The serial schedule is used
    # because Steane's checks are the Hamming code, whose all-ones column
    # trips the documented flooding overshoot and would add that one
    # decoder quirk to the otherwise purely structural failure set.
    merged, plan = steane_merge()
    config = DecoderConfig(schedule="serial")
    template = mc.build_decoding_matrix(merged, plan, 1)
    obs = unroll(mc.build_observables(merged, plan).to_dense(), template)
    p = 0.03
    exact, tail, failing = failure_probability_by_enumeration(
        template, obs, p, wmax=4, config=config
    )
    singles = failing[failing.sum(axis=1) == 1]
    hit = set(np.flatnonzero(singles.sum(axis=0)))
    assert hit == {
        template.n_qubits + int(v) for v in plan.preimages[0].support()
    }

    shots = 8192
    (stats,) = mc.run(toy_experiment(merged, plan, 1, (p,), shots), config)
    sigma = math.sqrt(exact * (1 - exact) / shots)
    assert abs(stats.rate - exact) <= 4.9 * sigma + tail


def test_two_round_pipeline_matches_exact_enumeration():
    # difference detectors + readout inference from the last noisy round
    merged, plan = rep3_merge()
    template = mc.build_decoding_matrix(merged, plan, 2)
    obs = unroll(mc.build_observables(merged, plan).to_dense(), template)
    p = 0.04
    exact, tail, _ = failure_probability_by_enumeration(template, obs, p, wmax=4)

    shots = 8192
    (stats,) = mc.run(toy_experiment(merged, plan, 2, (p,), shots))
    sigma = math.sqrt(exact * (1 - exact) / shots)
    assert abs(stats.rate - exact) <= 4.9 * sigma + tail


def test_negligible_rate_gives_zero_failures():
    merged, plan = case_merge("fast")
    (stats,) = mc.run(toy_experiment(merged, plan, 1, (1e-7,), 256))
    assert stats.failures == 0
    assert stats.rate == 0.0
    assert stats.ci_low == 0.0


def test_failure_rate_grows_with_physical_rate():
    merged, plan = steane_merge()
    lo, hi = mc.run(toy_experiment(merged, plan, 1, (0.005, 0.1), 3000))
    assert lo.p == 0.005 and hi.p == 0.1
    assert hi.rate > 4 * lo.rate > 0


# ---------------------------------------------------------------------------
# determinism and reporting
# ---------------------------------------------------------------------------


def test_runs_are_reproducible_and_thread_independent():
    merged, plan = steane_merge()
    exp = toy_experiment(merged, plan, 1, (0.05, 0.02), 3000)  # 2 chunks/rate
    first = mc.run(exp)
    again = mc.run(exp)
    threaded = mc.run(exp, threads=3)
    assert first == again == threaded
    assert [s.p for s in first] == [0.02, 0.05]  # sorted by rate

    text = formats.write_results_csv(mc.stats_rows(exp, first))
    assert text == formats.write_results_csv(mc.stats_rows(exp, mc.run(exp)))
    parsed = formats.read_results_csv(text)
    assert [row["p"] for row in parsed] == [0.02, 0.05]
    assert all(row["scheme"] == "toy" and row["rounds"] == 1 for row in parsed)


def test_stats_rows_carry_exactly_the_result_columns():
    merged, plan = rep3_merge()
    exp = toy_experiment(merged, plan, 1, (0.2,), 64)
    rows = mc.stats_rows(exp, mc.run(exp, decode=False))
    assert [tuple(r.keys()) for r in rows] == [formats.CSV_COLUMNS]


def test_shot_stats_uses_the_wilson_interval():
    s = mc.shot_stats(0.01, 400, 10)
    assert (s.p, s.shots, s.failures) == (0.01, 400, 10)
    assert s.rate == 10 / 400
    assert (s.ci_low, s.ci_high) == mc.wilson_interval(10, 400)
    assert s.ci_low < s.rate < s.ci_high


# ---------------------------------------------------------------------------
# Wilson intervals
# ---------------------------------------------------------------------------


def test_wilson_interval_matches_frozen_scipy_values():
    # computed offline with scipy.stats.binomtest(...).proportion_ci(0.99,
    # method="wilson") and frozen here so scipy is not a test dependency
    golden = {
        (5, 100): (0.016848316042600675, 0.13915030290164002),
        (0, 50): (0.0, 0.11715209171762797),
        (50, 50): (0.8828479082823721, 1.0),
        (37, 2000): (0.012181765754822233, 0.028002373740412426),
        (1, 3): (0.04042662929608476, 0.855783984952333),
    }
    for (f, n), want in golden.items():
        got = mc.wilson_interval(f, n)
        assert got == pytest.approx(want, rel=0, abs=1e-12), (f, n)


@pytest.mark.parametrize(
    "failures,shots",
    [(0, 1), (1, 1), (0, 17), (3, 17), (17, 17), (5, 100), (250, 1000), (999, 1000)],
)
def test_wilson_interval_matches_bisection_oracle(failures, shots):
    lo, hi = mc.wilson_interval(failures, shots)
    blo, bhi = wilson_by_bisection(failures, shots)
    assert abs(lo - blo) < 1e-9 and abs(hi - bhi) < 1e-9
    assert 0.0 <= lo <= failures / shots <= hi <= 1.0
    if failures == 0:
        assert lo == 0.0
    if failures == shots:
        assert hi == 1.0


def test_wilson_interval_rejects_impossible_counts():
    with pytest.raises(ValueError):
        mc.wilson_interval(-1, 10)
    with pytest.raises(ValueError):
        mc.wilson_interval(11, 10)


@given(
    st.integers(0, 400),
    st.integers(1, 400),
    st.floats(0.0, 1.0, allow_nan=False),
)
@settings(max_examples=120, deadline=None)
def test_wilson_interval_is_exactly_the_score_region(f_raw, shots, q):
    failures = min(f_raw, shots)
    lo, hi = mc.wilson_interval(failures, shots)
    assume(min(abs(q - lo), abs(q - hi)) > 1e-7)  # stay off the boundary
    phat = failures / shots
    z = mc.WILSON_Z99
    inside = (phat - q) ** 2 * shots <= z * z * q * (1.0 - q)
    assert inside == (lo < q < hi)


# ---------------------------------------------------------------------------
# log-log fits
# ---------------------------------------------------------------------------


def _stat(p: float, rate: float, failures: int = 1) -> mc.ShotStats:
    return mc.ShotStats(p, 10**6, failures, rate, 0.0, 1.0)


def test_loglog_fit_recovers_an_exact_power_law():
    stats = [_stat(p, 0.37 * p**2) for p in (1e-3, 3e-3, 1e-2)]
    fit = mc.loglog_fit(stats)
    assert not fit.insufficient
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(0.37), abs=1e-12)


def test_loglog_fit_matches_polyfit():
    pts = [(0.002, 0.0009), (0.005, 0.004), (0.02, 0.03)]
    fit = mc.loglog_fit([_stat(p, r) for p, r in pts])
    x = np.log([p for p, _ in pts])
    y = np.log([r for _, r in pts])
    slope, intercept = np.polyfit(x, y, 1)
    assert fit.slope == pytest.approx(slope, abs=1e-10)
    assert fit.intercept == pytest.approx(intercept, abs=1e-10)


def test_loglog_fit_skips_zero_failure_points():
    clean = [_stat(p, 0.5 * p) for p in (1e-3, 1e-2)]
    with_null = clean + [mc.ShotStats(3e-3, 10**6, 0, 0.0, 0.0, 1.0)]
    assert mc.loglog_fit(with_null) == mc.loglog_fit(clean)


def test_loglog_fit_reports_insufficient_data():
    assert mc.loglog_fit([]).insufficient
    assert mc.loglog_fit([_stat(1e-3, 1e-4)]).insufficient
    lone = [_stat(1e-3, 1e-4), mc.ShotStats(5e-3, 100, 0, 0.0, 0.0, 1.0)]
    assert mc.loglog_fit(lone).insufficient
    degenerate = [_stat(1e-3, 1e-4), _stat(1e-3, 2e-4)]
    fit = mc.loglog_fit(degenerate)
    assert fit.insufficient and math.isnan(fit.slope)


# ---------------------------------------------------------------------------
# experiment construction
# ---------------------------------------------------------------------------


def test_scheme_labels_pluralize_rounds():
    assert mc.scheme_label("fast", 1) == "fast-1-round"
    assert mc.scheme_label("standard", 3) == "standard-3-rounds"
    assert mc.scheme_label("standard", 1) == "standard-1-round"


def test_experiment_validation():
    merged, plan = rep3_merge()
    with pytest.raises(ValueError, match="rounds"):
        mc.Experiment("toy", merged, plan, 0, (0.01,), 10, 1)
    with pytest.raises(ValueError, match="empty"):
        mc.Experiment("toy", merged, plan, 1, (), 10, 1)
    with pytest.raises(ValueError, match="0, 0.5"):
        mc.Experiment("toy", merged, plan, 1, (0.5,), 10, 1)
    with pytest.raises(ValueError, match="0, 0.5"):
        mc.Experiment("toy", merged, plan, 1, (0.01, 0.0), 10, 1)
    with pytest.raises(ValueError, match="shots"):
        mc.Experiment("toy", merged, plan, 1, (0.01,), 0, 1)


def test_experiment_from_settings_accepts_family_or_full_label():
    fast = mc.experiment_from_settings(
        formats.ExperimentSettings("fast", 1, (0.01,), 5, 3)
    )
    assert fast.scheme == "fast-1-round"
    assert fast.merged.n == 62 and fast.rounds == 1
    assert fast.physical_rates == (0.01,) and fast.shots == 5 and fast.seed == 3

    std = mc.experiment_from_settings(
        formats.ExperimentSettings("standard-3-rounds", 3, (0.01, 0.02), 4, 9)
    )
    assert std.scheme == "standard-3-rounds"
    assert std.merged.n == 48 and std.rounds == 3


def test_experiment_from_settings_rejects_mismatch_and_unknown():
    with pytest.raises(formats.FormatError, match="does not match rounds"):
        mc.experiment_from_settings(
            formats.ExperimentSettings("standard-3-rounds", 2, (0.01,), 5, 3)
        )
    with pytest.raises(ValueError, match="unknown scheme family"):
        mc.experiment_from_settings(
            formats.ExperimentSettings("sideways", 1, (0.01,), 5, 3)
        )


def test_case_study_experiments_cover_the_three_curves():
    exps = case_experiments()
    assert [e.scheme for e in exps] == [
        "fast-1-round",
        "standard-3-rounds",
        "standard-1-round",
    ]
    assert [e.rounds for e in exps] == [1, 3, 1]
    assert exps[0].merged.n == 62
    assert exps[1].merged is exps[2].merged  # one standard merge, two depths
    assert exps[1].merged.n == 48
    assert len({e.physical_rates for e in exps}) == 1
    assert len({(e.shots, e.seed) for e in exps}) == 1
