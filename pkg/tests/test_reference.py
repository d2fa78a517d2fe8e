import numpy as np
import pytest

from timebin_dj.oracles import (
    OracleClass,
    all_oracles,
    classify,
    constant_oracle,
    oracle_bv,
    oracle_complement,
)
from timebin_dj.reference import (
    MINUS,
    apply_oracle_with_ancilla,
    apply_phase_oracle,
    basis_state,
    bv_readout,
    check_bv_recovery,
    classical_bv_queries,
    classical_bv_recover,
    classical_dj_decide,
    classical_dj_worst_case,
    dj_adversary_completions,
    dj_decision,
    dj_distribution,
    hadamard_all,
    with_ancilla,
)
from timebin_dj.timebin import all_bitstrings, bits_to_index


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_hadamard_on_zero_is_uniform(n):
    assert np.allclose(hadamard_all(basis_state(n)), 2 ** (-n / 2))


def test_hadamard_involutive_and_unitary():
    rng = np.random.default_rng(1)
    for n in (1, 2, 3, 6):
        s = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
        s /= np.linalg.norm(s)
        h = hadamard_all(s)
        assert np.linalg.norm(h) == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(hadamard_all(h), s, atol=1e-12)


def test_hadamard_one_qubit():
    assert np.allclose(hadamard_all(basis_state(1, 1)), [2 ** -0.5, -(2 ** -0.5)])


def test_hadamard_matches_definition():
    n = 3
    H = np.array([[(-1) ** bin(x & z).count("1") for z in range(8)] for x in range(8)]) / 2 ** 1.5
    for x in range(8):
        assert np.allclose(hadamard_all(basis_state(n, x)), H[x])


def test_phase_oracle_examples():
    s = hadamard_all(basis_state(3))
    assert np.allclose(apply_phase_oracle(s, constant_oracle(3, 0)), s)
    assert np.allclose(apply_phase_oracle(s, constant_oracle(3, 1)), -s)
    out = apply_phase_oracle(s, oracle_bv("111"))
    flipped = {x for x in range(8) if out[x].real < 0}
    assert flipped == {0b001, 0b010, 0b100, 0b111}
    with pytest.raises(ValueError):
        apply_phase_oracle(s, constant_oracle(2))


def test_ancilla_oracle_examples():
    reg = hadamard_all(basis_state(2))
    zero_anc = with_ancilla(reg, np.array([1.0, 0.0]))
    out = apply_oracle_with_ancilla(zero_anc, constant_oracle(2, 1))
    assert np.allclose(out[:, 0], 0) and np.allclose(out[:, 1], reg)
    assert np.allclose(apply_oracle_with_ancilla(zero_anc, constant_oracle(2, 0)), zero_anc)


def test_ancilla_minus_reduces_to_phase_oracle():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        o = all_oracles(n)[int(rng.integers(0, 2 ** 2 ** n))]
        reg = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
        reg /= np.linalg.norm(reg)
        lhs = apply_oracle_with_ancilla(with_ancilla(reg, MINUS), o)
        rhs = with_ancilla(apply_phase_oracle(reg, o), MINUS)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_dj_distribution_examples():
    assert dj_distribution(constant_oracle(3))[0] == pytest.approx(1.0)
    assert dj_distribution(oracle_bv("011"))[0] == pytest.approx(0.0, abs=1e-15)
    for j in all_bitstrings(3):
        assert dj_distribution(oracle_bv(j))[bits_to_index(j)] == pytest.approx(1.0)
        assert bv_readout(oracle_bv(j)) == j


def test_dj_distribution_sums_to_one_and_complement_invariant():
    for o in all_oracles(2):
        p = dj_distribution(o)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(p, dj_distribution(oracle_complement(o)), atol=1e-12)


def test_dj_decision_on_promise_oracles():
    for o in all_oracles(3):
        cls = classify(o)
        if cls is not OracleClass.NEITHER:
            assert dj_decision(o) is cls


def test_classical_counts():
    assert classical_dj_worst_case(1) == 2
    assert classical_dj_worst_case(3) == 5
    assert classical_bv_queries(1) == 1
    assert classical_bv_queries(3) == 3


def test_dj_adversary_leaves_both_classes_open():
    n = 3
    const, bal = dj_adversary_completions(n)
    first = classical_dj_decide(const).queried[: 2 ** (n - 1)]
    assert len(first) == 4
    assert all(const(x) == bal(x) == 0 for x in first)
    assert classify(const) is OracleClass.CONSTANT and classify(bal) is OracleClass.BALANCED


def test_classical_dj_strategy():
    run = classical_dj_decide(constant_oracle(3))
    assert run.verdict == "constant" and run.queries == 5
    _, bal = dj_adversary_completions(3)
    run = classical_dj_decide(bal)
    assert run.verdict == "balanced" and run.queries == 5
    assert classical_dj_decide(oracle_bv("001")).queries == 2


def test_classical_bv_strategy():
    j, q = classical_bv_recover(oracle_bv("101"))
    assert j == (1, 0, 1) and q == 3
    assert classical_bv_recover(oracle_bv("1"))[1] == 1
    assert check_bv_recovery(4)


def test_quantum_bv_needs_one_query_for_any_n():
    for n in (1, 4, 8):
        j = tuple(int(b) for b in np.random.default_rng(n).integers(0, 2, n))
        p = dj_distribution(oracle_bv(j))
        assert p[bits_to_index(j)] == pytest.approx(1.0)
