"""Sparse complex-amplitude states over discrete time bins.

Bin indices are integers in units of the shortest interferometer delay.
The physical duration of one unit is carried as metadata only, so that
time comparisons never depend on floating-point equality.
"""

from __future__ import annotations

import cmath
import math
from typing import Iterable, Mapping, Sequence

BitString = tuple[int, ...]

FORWARD = 1
BACKWARD = -1

DEFAULT_UNIT_NS = 3.75  # 4 * unit = 15 ns


class TimeBinState:
    """Immutable map from time-bin index to complex amplitude.

    A state may be sub-normalized; the missing probability is light that
    was absorbed or routed away.  Amplitudes with squared magnitude below
    ``prune`` are dropped on construction.  With the default ``prune=0``
    nothing is dropped, so a bin that received a path but interfered to
    zero is still listed.
    """

    __slots__ = ("_bins", "n", "unit_ns", "direction", "prune")

    def __init__(
        self,
        bins: Mapping[int, complex] | None = None,
        *,
        n: int | None = None,
        unit_ns: float = DEFAULT_UNIT_NS,
        direction: int = FORWARD,
        prune: float = 0.0,
    ):
        clean: dict[int, complex] = {}
        for b, a in (bins or {}).items():
            a = complex(a)
            if not (math.isfinite(a.real) and math.isfinite(a.imag)):
                raise ValueError(f"non-finite amplitude {a!r} at bin {b}")
            if abs(a) ** 2 < prune:
                continue
            clean[int(b)] = a
        self._bins = clean
        self.n = n
        self.unit_ns = unit_ns
        self.direction = direction
        self.prune = prune

    def replace(self, bins: Mapping[int, complex], **meta) -> "TimeBinState":
        kw = dict(n=self.n, unit_ns=self.unit_ns, direction=self.direction, prune=self.prune)
        kw.update(meta)
        return TimeBinState(bins, **kw)

    @property
    def bins(self) -> dict[int, complex]:
        return dict(self._bins)

    def __getitem__(self, b: int) -> complex:
        return self._bins.get(b, 0j)

    def __contains__(self, b: int) -> bool:
        return b in self._bins

    def __len__(self) -> int:
        return len(self._bins)

    def __iter__(self):
        return iter(sorted(self._bins))

    def items(self):
        return sorted(self._bins.items())

    def times_ns(self) -> dict[int, float]:
        return {b: b * self.unit_ns for b in sorted(self._bins)}

    def __repr__(self) -> str:
        body = ", ".join(f"{b}: {a:.6g}" for b, a in self.items())
        return f"TimeBinState({{{body}}})"


def total_probability(state: TimeBinState) -> float:
    return float(sum(abs(a) ** 2 for a in state._bins.values()))


def add_amplitude(state: TimeBinState, bin: int, a: complex) -> TimeBinState:
    """Coherently add ``a`` to the amplitude held at ``bin``."""
    bins = state.bins
    bins[bin] = bins.get(bin, 0j) + complex(a)
    return state.replace(bins)


def superpose(states: Iterable[TimeBinState]) -> TimeBinState:
    """Coherent sum of several states sharing the same metadata."""
    states = list(states)
    if not states:
        return TimeBinState()
    acc: dict[int, complex] = {}
    for s in states:
        for b, a in s._bins.items():
            acc[b] = acc.get(b, 0j) + a
    return states[0].replace(acc)


def shift(state: TimeBinState, delay: int, phase: float = 0.0, factor: complex = 1.0) -> TimeBinState:
    """Delay every pulse by ``delay`` bins and multiply by ``factor * e^{i phase}``."""
    k = complex(factor) * cmath.exp(1j * phase)
    return state.replace({b + delay: a * k for b, a in state._bins.items()})


def scale(state: TimeBinState, factor: complex) -> TimeBinState:
    return shift(state, 0, 0.0, factor)


def apply_phase_pattern(state: TimeBinState, pattern: Mapping[int, float]) -> TimeBinState:
    """Multiply the amplitude at each listed bin by ``e^{i phase}``."""
    bins = state.bins
    for b, phi in pattern.items():
        if not math.isfinite(phi):
            raise ValueError(f"non-finite phase at bin {b}")
        if b in bins:
            bins[b] = bins[b] * cmath.exp(1j * phi)
    return state.replace(bins)


def bitstring_to_bin(x: Sequence[int], deltas: Sequence[int]) -> int:
    if len(x) != len(deltas):
        raise ValueError(f"bit string of length {len(x)} does not match {len(deltas)} delays")
    return sum(int(b) * int(d) for b, d in zip(x, deltas))


# Bit strings are tuples (b_1, ..., b_n).  Where a vector is indexed by a
# bit string, b_1 is the most significant bit, so "101" -> index 5.

def parse_bits(text: str) -> BitString:
    text = text.strip()
    if not text or any(c not in "01" for c in text):
        raise ValueError(f"not a bit string: {text!r}")
    return tuple(int(c) for c in text)


def format_bits(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def bits_to_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def index_to_bits(index: int, n: int) -> BitString:
    if not 0 <= index < 2 ** n:
        raise ValueError(f"index {index} out of range for n={n}")
    return tuple((index >> (n - 1 - l)) & 1 for l in range(n))


def all_bitstrings(n: int) -> list[BitString]:
    return [index_to_bits(i, n) for i in range(2 ** n)]


def dot(x: Sequence[int], y: Sequence[int]) -> int:
    """Inner product of two bit strings, mod 2."""
    return sum(int(a) & int(b) for a, b in zip(x, y)) & 1
