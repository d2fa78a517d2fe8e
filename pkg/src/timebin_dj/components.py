"""Optical elements acting on time-bin states.

Couplers follow the symmetric convention: transmission is real and
reflection carries a factor ``i``.  A pulse reflected twice therefore picks
up ``-1``, which is the coupler phase bookkeeping of the interferometer
chain.

An unbalanced Mach-Zehnder interferometer is two couplers joined by a
short arm and a long arm.  Port ``a`` of each coupler faces the main line
and port ``b`` the spare port; transmission keeps a pulse on the short
arm side, reflection crosses it to the long arm.  Travelling forward the
light enters at the input coupler, travelling back it enters at the
output coupler, and the same routine handles both directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .timebin import BACKWARD, FORWARD, TimeBinState, scale, shift, superpose


@dataclass(frozen=True)
class CouplerSpec:
    transmittance: float = 0.5
    excess_loss: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.transmittance <= 1.0:
            raise ValueError(f"coupler transmittance {self.transmittance} outside [0, 1]")
        if not 0.0 <= self.excess_loss <= 1.0:
            raise ValueError(f"coupler excess loss {self.excess_loss} outside [0, 1]")

    @property
    def t(self) -> float:
        return math.sqrt(self.transmittance) * math.sqrt(1.0 - self.excess_loss)

    @property
    def r(self) -> float:
        return math.sqrt(1.0 - self.transmittance) * math.sqrt(1.0 - self.excess_loss)


@dataclass(frozen=True)
class MziSpec:
    delta: int
    phi: float = 0.0
    in_coupler: CouplerSpec = field(default_factory=CouplerSpec)
    out_coupler: CouplerSpec = field(default_factory=CouplerSpec)

    def __post_init__(self):
        if self.delta < 1:
            raise ValueError(f"MZI delay must be >= 1 bin, got {self.delta}")


@dataclass(frozen=True)
class OutputArmSpec:
    L: int
    has_isolator: bool = False

    def __post_init__(self):
        if self.L < 0:
            raise ValueError(f"delay line length must be >= 0, got {self.L}")


def coupler_scatter(a_in: complex, b_in: complex, spec: CouplerSpec) -> tuple[complex, complex]:
    t, r = spec.t, spec.r
    return t * a_in + 1j * r * b_in, 1j * r * a_in + t * b_in


def coupler_matrix(spec: CouplerSpec):
    t, r = spec.t, spec.r
    return ((t, 1j * r), (1j * r, t))


def _coupler_states(a: TimeBinState, b: TimeBinState, spec: CouplerSpec) -> tuple[TimeBinState, TimeBinState]:
    (m00, m01), (m10, m11) = coupler_matrix(spec)
    out_a = superpose([scale(a, m00), scale(b, m01)])
    out_b = superpose([scale(a, m10), scale(b, m11)])
    return out_a, out_b


def mzi_propagate(
    in_a: TimeBinState,
    in_b: TimeBinState,
    delta: int,
    phi: float,
    first: CouplerSpec,
    second: CouplerSpec,
) -> tuple[TimeBinState, TimeBinState]:
    """Two-port pass through an unbalanced MZI.

    ``first`` is the coupler the light meets first.  Returns the states in
    the main (``a``) and spare (``b``) ports of the second coupler.
    """
    short, long_ = _coupler_states(in_a, in_b, first)
    long_ = shift(long_, delta, phi)
    return _coupler_states(short, long_, second)


def mzi_forward(state: TimeBinState, spec: MziSpec) -> tuple[TimeBinState, TimeBinState]:
    """Forward pass; returns ``(through, drop)``."""
    empty = state.replace({})
    return mzi_propagate(state, empty, spec.delta, spec.phi, spec.in_coupler, spec.out_coupler)


def mzi_backward(
    in_a: TimeBinState, in_b: TimeBinState, spec: MziSpec, phi: float | None = None
) -> tuple[TimeBinState, TimeBinState]:
    """Backward pass entering at the output coupler.

    ``in_b`` is light arriving through the downstream delay line.  The
    returned ``b`` port feeds this stage's own delay line.
    """
    phi = spec.phi if phi is None else phi
    return mzi_propagate(in_a, in_b, spec.delta, phi, spec.out_coupler, spec.in_coupler)


def faraday_reflect(state: TimeBinState) -> TimeBinState:
    """Ideal Faraday mirror: amplitudes unchanged, direction reversed."""
    flipped = BACKWARD if state.direction == FORWARD else FORWARD
    return state.replace(state.bins, direction=flipped)


def isolate(state: TimeBinState) -> TimeBinState:
    """Isolator passing backward-travelling light and absorbing the rest."""
    if state.direction == FORWARD:
        return state.replace({})
    return state


def arm_propagate(state: TimeBinState, arm: OutputArmSpec) -> TimeBinState:
    if arm.has_isolator:
        state = isolate(state)
    return shift(state, arm.L)


def attenuate(state: TimeBinState, power_transmittance: float) -> TimeBinState:
    if not 0.0 <= power_transmittance <= 1.0:
        raise ValueError(f"power transmittance {power_transmittance} outside [0, 1]")
    return scale(state, math.sqrt(power_transmittance))


def db_to_transmittance(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 10.0)
