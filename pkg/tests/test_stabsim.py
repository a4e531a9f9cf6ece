"""Tableau engine against a dense statevector oracle, then the protocol runs."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsurgery import gadgets, stabsim, surgery
from qsurgery.csscode import logical_basis
from qsurgery.f2 import BitVector
from qsurgery.stabsim import (
    FaultSet,
    PauliOperator,
    Tableau,
    exhaustive_fault_scan,
    prepare_code_state,
    run_fast_surgery,
    x_pauli,
    z_pauli,
)
from test_csscode import steane
from test_surgery import fault_scan_dense, rep3_path_map

# ---------------------------------------------------------------------------
# dense statevector oracle: brute-force 2^n linear algebra, no tableau logic
# ---------------------------------------------------------------------------

_SINGLE = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
}


def dense_pauli(p: PauliOperator) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for xb, zb in zip(p.x.to_dense(), p.z.to_dense()):
        m = np.kron(m, _SINGLE[(int(xb), int(zb))])
    return p.sign * m


class DenseState:
    """Statevector simulation; measurements take the outcome to project on."""

    def __init__(self, n: int):
        self.n = n
        self.psi = np.zeros(2**n, dtype=complex)
        self.psi[0] = 1.0

    def expectation(self, p: PauliOperator) -> float:
        return float(np.real(self.psi.conj() @ dense_pauli(p) @ self.psi))

    def project(self, p: PauliOperator, outcome: int) -> None:
        phi = (self.psi + outcome * dense_pauli(p) @ self.psi) / 2
        norm = np.linalg.norm(phi)
        assert norm > 1e-9, "projected onto a forbidden outcome"
        self.psi = phi / norm

    def apply(self, p: PauliOperator) -> None:
        self.psi = dense_pauli(p) @ self.psi


def all_paulis(n: int):
    for xm in range(2**n):
        for zm in range(2**n):
            yield PauliOperator(
                BitVector.from_bits([(xm >> i) & 1 for i in range(n)]),
                BitVector.from_bits([(zm >> i) & 1 for i in range(n)]),
            )


def assert_states_agree(t: Tableau, dense: DenseState) -> None:
    for p in all_paulis(t.n):
        got = t.expectation(p)
        want = dense.expectation(p)
        assert abs(got - want) < 1e-9, (p.x.to01(), p.z.to01(), got, want)


def random_pauli(rng, n: int) -> PauliOperator:
    return PauliOperator(
        BitVector.from_bits(rng.integers(0, 2, n)),
        BitVector.from_bits(rng.integers(0, 2, n)),
        1 if rng.integers(2) == 0 else -1,
    )


# ---------------------------------------------------------------------------
# tableau engine
# ---------------------------------------------------------------------------


def test_fresh_tableau_is_all_zeros():
    t = Tableau(3)
    for i in range(3):
        assert t.expectation(z_pauli(BitVector.from_support(3, [i]))) == 1
        assert t.expectation(x_pauli(BitVector.from_support(3, [i]))) == 0
    assert t.expectation(z_pauli(BitVector.from_bits([1, 1, 0]))) == 1
    assert t.expectation(z_pauli(BitVector.from_bits([1, 1, 0]), sign=-1)) == -1
    t.check()


def test_random_walk_matches_dense_oracle():
    # measurements, Pauli frames, and expectations all agree with brute force
    for seed in range(30):
        rng = np.random.default_rng(seed)
        n = 1 + seed % 3
        t = Tableau(n)
        dense = DenseState(n)
        assert_states_agree(t, dense)
        for _ in range(8):
            p = random_pauli(rng, n)
            action = rng.integers(3)
            if action == 0:
                before = dense.expectation(p)
                outcome = t.measure(p, rng)
                if abs(before) > 1e-9:  # determined: both routes must agree
                    assert outcome == int(round(before))
                dense.project(p, outcome)
                assert t.measure(p, rng) == outcome  # repeat is deterministic
            elif action == 1:
                t.apply_pauli(p)
                dense.apply(p)
            else:
                t.check()
            assert_states_agree(t, dense)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_tableau_invariants_random_walk(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 4
    t = Tableau(n)
    for _ in range(10):
        p = random_pauli(rng, n)
        outcome = t.measure(p, rng)
        assert outcome in (1, -1)
        assert t.expectation(p) == outcome
        t.check()


def test_measure_outcomes_are_balanced():
    hits = {1: 0, -1: 0}
    for seed in range(200):
        t = Tableau(1)
        out = t.measure(x_pauli(BitVector.from_bits([1])), np.random.default_rng(seed))
        hits[out] += 1
    assert 60 <= hits[1] <= 140


def test_measure_to_steers_random_outcomes():
    rng = np.random.default_rng(5)
    for want in (1, -1):
        t = Tableau(2)
        t.measure_to(x_pauli(BitVector.from_bits([1, 0])), want, rng)
        assert t.expectation(x_pauli(BitVector.from_bits([1, 0]))) == want


def test_measure_to_rejects_determined_outcome():
    t = Tableau(1)
    with pytest.raises(ValueError, match="determined"):
        t.measure_to(z_pauli(BitVector.from_bits([1])), -1, np.random.default_rng(0))


def test_padded_front_adds_zeroed_qubits():
    rng = np.random.default_rng(3)
    t = Tableau(1)
    t.measure_to(x_pauli(BitVector.from_bits([1])), -1, rng)
    p = t.padded_front(2)
    assert p.n == 3
    assert p.expectation(z_pauli(BitVector.from_support(3, [0]))) == 1
    assert p.expectation(z_pauli(BitVector.from_support(3, [1]))) == 1
    assert p.expectation(x_pauli(BitVector.from_support(3, [2]))) == -1
    p.check()


def test_drop_front_qubits_keeps_data_state():
    rng = np.random.default_rng(11)
    t = Tableau(3)
    t.measure_to(x_pauli(BitVector.from_bits([0, 1, 1])), -1, rng)
    assert t.expectation(z_pauli(BitVector.from_bits([0, 1, 1]))) == 1
    out = t.drop_front_qubits(1)
    assert out.n == 2
    assert out.expectation(x_pauli(BitVector.from_bits([1, 1]))) == -1
    assert out.expectation(z_pauli(BitVector.from_bits([1, 1]))) == 1
    out.check()
    # rebuilt destabilizers keep working through another measurement
    assert out.measure(x_pauli(BitVector.from_bits([1, 1])), rng) == -1
    out.check()


def test_drop_front_rejects_nonzero_qubit():
    rng = np.random.default_rng(2)
    t = Tableau(2)
    t.measure_to(x_pauli(BitVector.from_bits([1, 0])), 1, rng)
    with pytest.raises(RuntimeError, match="zero state"):
        t.drop_front_qubits(1)


def test_drop_front_rejects_entangled_qubit():
    rng = np.random.default_rng(2)
    t = Tableau(2)
    t.measure_to(x_pauli(BitVector.from_bits([1, 1])), 1, rng)
    with pytest.raises(RuntimeError, match="zero state"):
        t.drop_front_qubits(1)


def test_pauli_operator_validation():
    with pytest.raises(ValueError, match="different lengths"):
        PauliOperator(BitVector.zeros(2), BitVector.zeros(3))
    with pytest.raises(ValueError, match="sign"):
        PauliOperator(BitVector.zeros(2), BitVector.zeros(2), sign=2)
    a = x_pauli(BitVector.from_bits([1, 0]))
    b = z_pauli(BitVector.from_bits([1, 0]))
    assert not a.commutes_with(b)
    assert a.commutes_with(x_pauli(BitVector.from_bits([0, 1])))


# ---------------------------------------------------------------------------
# the protocol
# ---------------------------------------------------------------------------


def _merge_of(m):
    return surgery.total_complex(m), surgery.build_plan(m)


def test_prepare_code_state_satisfies_all_checks():
    code = steane()
    rng = np.random.default_rng(0)
    t = prepare_code_state(code.hx, rng)
    for i in range(code.hx.rows):
        assert t.expectation(x_pauli(code.hx.row(i))) == 1
    for i in range(code.hz.rows):
        assert t.expectation(z_pauli(code.hz.row(i))) == 1
    t.check()


def test_protocol_eigenstate_reproduces_eigenvalue():
    code, _, m = rep3_path_map()
    merged, plan = _merge_of(m)
    logical = plan.basis[0]
    for want in (1, -1):
        rng = np.random.default_rng(17 if want == 1 else 18)
        t = Tableau(3)
        t.measure_to(x_pauli(logical), want, rng)
        record = run_fast_surgery(t, plan, merged, rng)
        assert record.logical_outcomes == (want,)
        assert record.tableau.expectation(x_pauli(logical)) == want
        for i in range(code.hz.rows):
            assert record.tableau.expectation(z_pauli(code.hz.row(i))) == 1


def test_protocol_output_stabilized_by_outcome_and_checks():
    code = steane()
    logical = logical_basis(code, "X")[0]
    w = logical.weight()
    edges = [(i, i + 1) for i in range(w - 1)] + [(0, w - 1)]
    _, m = gadgets.gauging_gadget(code, logical, tuple(edges))
    merged, plan = _merge_of(m)
    assert len(plan) == 1
    for seed in range(6):
        rng = np.random.default_rng([20260815, seed])
        t = stabsim.random_code_state(code, rng)
        record = run_fast_surgery(t, plan, merged, rng)
        post = record.tableau
        post.check()
        for l, h in enumerate(plan.basis):
            assert post.expectation(x_pauli(h)) == record.logical_outcomes[l]
        for i in range(code.hx.rows):
            assert post.expectation(x_pauli(code.hx.row(i))) == 1
        for i in range(code.hz.rows):
            assert post.expectation(z_pauli(code.hz.row(i))) == 1
        # the measurement is now done: a second pass must reproduce the
        # outcomes no matter what the fresh randomness does
        again = run_fast_surgery(post, plan, merged, np.random.default_rng(seed))
        assert again.logical_outcomes == record.logical_outcomes


def test_protocol_same_seed_same_record():
    code, _, m = rep3_path_map()
    merged, plan = _merge_of(m)
    runs = []
    for _ in range(2):
        rng = np.random.default_rng(99)
        t = Tableau(3)
        runs.append(run_fast_surgery(t, plan, merged, rng))
    assert runs[0].logical_outcomes == runs[1].logical_outcomes
    assert runs[0].check_outcomes == runs[1].check_outcomes
    assert runs[0].ancilla_outcomes == runs[1].ancilla_outcomes


def test_protocol_rejects_wrong_register_sizes():
    _, _, m = rep3_path_map()
    merged, plan = _merge_of(m)
    with pytest.raises(ValueError, match="data register"):
        run_fast_surgery(Tableau(4), plan, merged, np.random.default_rng(0))


def test_fault_set_location_round_trip():
    _, _, m = rep3_path_map()
    merged, _ = _merge_of(m)
    locs = (0, 2, 3, 6)
    fs = FaultSet.from_locations(merged, locs)
    assert fs.check_flips == (0, 2)
    assert fs.ancilla_z == (0,)
    assert fs.data_z == (1,)
    assert fs.locations(merged) == locs
    assert fs.weight == 4
    with pytest.raises(ValueError, match="out of range"):
        FaultSet.from_locations(merged, (99,))


def test_outcome_flip_flips_logical_product():
    _, _, m = rep3_path_map()
    merged, plan = _merge_of(m)
    v = plan.preimages[0].support()[0]
    rng = np.random.default_rng(4)
    t = Tableau(3)
    t.measure_to(x_pauli(plan.basis[0]), 1, rng)
    record = run_fast_surgery(
        t, plan, merged, rng, FaultSet(check_flips=(v,))
    )
    assert record.logical_outcomes == (-1,)


def test_exhaustive_scan_rep3_matches_dense_oracle():
    _, d, m = rep3_path_map()
    merged, plan = _merge_of(m)
    report = exhaustive_fault_scan(plan, merged, 2, seed=1)
    n_loc = merged.ancilla_x_checks + merged.ancilla_qubits + 3
    assert report.runs == 1 + n_loc + n_loc * (n_loc - 1) // 2
    assert report.detected + report.benign + len(report.corrupting) == report.runs
    assert report.benign >= 1  # the empty fault set
    assert min(len(c) for c in report.corrupting) == fault_scan_dense(d, m, plan, 2)


def test_exhaustive_scan_triangle_gauging_matches_algebraic_distance():
    code = steane()
    logical = logical_basis(code, "X")[0]
    w = logical.weight()
    edges = tuple((i, i + 1) for i in range(w - 1)) + ((0, w - 1),)
    _, m = gadgets.gauging_gadget(code, logical, edges)
    merged, plan = _merge_of(m)
    assert len(plan) == 1
    report = exhaustive_fault_scan(plan, merged, 2, seed=3)
    want = surgery.fault_distance(merged, plan, 2)
    assert min(len(c) for c in report.corrupting) == want


def test_exhaustive_scan_subcomplex_gadget_has_meta_protection():
    # measuring a base X check through a subcomplex gadget: the generator
    # level supplies a meta check, and nothing is logically corrupted
    code = steane()
    row = code.hx.row(0)
    qubits = row.support()
    touching = sorted(
        int(r)
        for r in range(code.hz.rows)
        if set(code.hz.row(r).support()) & set(qubits)
    )
    _, m = gadgets.subcomplex_gadget(code, [row], qubits, touching)
    merged, plan = _merge_of(m)
    assert merged.ancilla_x_metas == 1
    assert len(plan) == 0  # a stabilizer measurement deforms nothing
    report = exhaustive_fault_scan(plan, merged, 2, seed=4)
    assert report.corrupting == ()
    assert report.detected > 0
    assert report.detected + report.benign == report.runs
