"""Gate-model Deutsch-Jozsa / Bernstein-Vazirani and classical baselines.

Dense state vectors of length ``2**n``; basis index ``x`` has ``x_1`` as
its most significant bit.  An ancilla, when present, is the trailing axis
of a ``(2**n, 2)`` array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracles import OracleClass, OracleSpec, classify, oracle_bv
from .timebin import BitString, all_bitstrings, index_to_bits

MAX_QUBITS = 20

MINUS = np.array([1.0, -1.0]) / np.sqrt(2.0)


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n={n} outside supported range 1..{MAX_QUBITS}")


def _n_of(amplitudes: np.ndarray) -> int:
    size = amplitudes.shape[0]
    n = size.bit_length() - 1
    if 2 ** n != size:
        raise ValueError(f"state length {size} is not a power of two")
    return n


def basis_state(n: int, x: int = 0) -> np.ndarray:
    _check_n(n)
    s = np.zeros(2 ** n, dtype=complex)
    s[x] = 1.0
    return s


def hadamard_all(state: np.ndarray) -> np.ndarray:
    """Apply H to every qubit (fast Walsh-Hadamard transform).

    Works on a bare register or on a register with trailing ancilla axis.
    """
    s = np.array(state, dtype=complex)
    n = _n_of(s)
    _check_n(n)
    tail = s.shape[1:]
    s = s.reshape((2,) * n + tail)
    for axis in range(n):
        a = np.take(s, 0, axis=axis)
        b = np.take(s, 1, axis=axis)
        s = np.stack([a + b, a - b], axis=axis)
    return s.reshape((2 ** n,) + tail) / 2 ** (n / 2)


def _check_size(state: np.ndarray, o: OracleSpec) -> None:
    if state.shape[0] != 2 ** o.n:
        raise ValueError(f"state has {state.shape[0]} amplitudes, oracle expects {2 ** o.n}")


def apply_phase_oracle(state: np.ndarray, o: OracleSpec) -> np.ndarray:
    _check_size(state, o)
    return np.asarray(state, dtype=complex) * np.array(o.signs(), dtype=float)


def apply_oracle_with_ancilla(state: np.ndarray, o: OracleSpec) -> np.ndarray:
    """``|x>|y> -> |x>|y xor f(x)>`` on a ``(2**n, 2)`` array."""
    state = np.asarray(state, dtype=complex)
    _check_size(state, o)
    if state.shape[1:] != (2,):
        raise ValueError("ancilla state must have shape (2**n, 2)")
    out = state.copy()
    flip = np.array(o.table, dtype=bool)
    out[flip] = state[flip][:, ::-1]
    return out


def with_ancilla(register: np.ndarray, ancilla: np.ndarray = MINUS) -> np.ndarray:
    return np.outer(register, ancilla)


def dj_state(o: OracleSpec) -> np.ndarray:
    _check_n(o.n)
    s = hadamard_all(basis_state(o.n))
    return hadamard_all(apply_phase_oracle(s, o))


def dj_distribution(o: OracleSpec) -> np.ndarray:
    """Outcome probabilities ``P(z)`` of the DJ circuit, indexed by ``z``."""
    return np.abs(dj_state(o)) ** 2


def dj_decision(o: OracleSpec) -> OracleClass:
    """Quantum one-query verdict: constant iff ``P(0) = 1``."""
    p0 = dj_distribution(o)[0]
    if np.isclose(p0, 1.0):
        return OracleClass.CONSTANT
    if np.isclose(p0, 0.0):
        return OracleClass.BALANCED
    return OracleClass.NEITHER


def bv_readout(o: OracleSpec) -> BitString:
    return index_to_bits(int(np.argmax(dj_distribution(o))), o.n)


# classical baselines

def classical_dj_worst_case(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2 ** (n - 1) + 1


def classical_bv_queries(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return n


@dataclass(frozen=True)
class ClassicalRun:
    verdict: str
    queries: int
    queried: tuple[int, ...]


def classical_dj_decide(o: OracleSpec) -> ClassicalRun:
    """Deterministic strategy: query in order until two answers differ.

    Stops early with "balanced" on a disagreement and answers "constant"
    after ``2**(n-1) + 1`` equal answers.
    """
    limit = classical_dj_worst_case(o.n)
    first = o.table[0]
    queried = [0]
    for x in range(1, limit):
        queried.append(x)
        if o.table[x] != first:
            return ClassicalRun("balanced", len(queried), tuple(queried))
    return ClassicalRun("constant", len(queried), tuple(queried))


def dj_adversary_completions(n: int, answer: int = 0) -> tuple[OracleSpec, OracleSpec]:
    """Two oracles agreeing on the first ``2**(n-1)`` queries of the strategy.

    Both answer ``answer`` on every input the deterministic strategy asks
    about first; one is constant and the other balanced, so that many
    queries cannot settle the problem.
    """
    half = 2 ** (n - 1)
    constant = OracleSpec(n, (answer,) * 2 ** n)
    balanced = OracleSpec(n, (answer,) * half + (1 - answer,) * half)
    assert classify(constant) is OracleClass.CONSTANT
    assert classify(balanced) is OracleClass.BALANCED
    return constant, balanced


def unit_vectors(n: int) -> list[BitString]:
    return [tuple(int(k == l) for k in range(n)) for l in range(n)]


def classical_bv_recover(o: OracleSpec) -> tuple[BitString, int]:
    """Recover ``j`` from ``f_j`` with one query per unit vector."""
    j = tuple(o(e) for e in unit_vectors(o.n))
    return j, o.n


def check_bv_recovery(n: int) -> bool:
    return all(classical_bv_recover(oracle_bv(j))[0] == j for j in all_bitstrings(n))
