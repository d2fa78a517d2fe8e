"""The autocompensated double-pass setup.

A single pulse crosses ``n`` unbalanced MZIs, is reflected by a Faraday
mirror, picks up the oracle's 0/pi phase pattern on the way back, and
crosses the MZIs again.  On the return trip each stage can hand the pulse
to the next stage either directly or through a delay line ``L_l``; the bit
``z_l`` records which.  Every output pulse therefore sits at time

    sum_l (x_l + y_l) * delta_l + sum_l z_l * L_l

where ``x_l`` / ``y_l`` mark the long arm on the forward / backward pass.
Only the ``2**n`` bins with ``x_l + y_l = 1`` for every stage carry the
full ``2**n``-path interference; everything else is discarded.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .components import (
    CouplerSpec,
    MziSpec,
    OutputArmSpec,
    arm_propagate,
    faraday_reflect,
    mzi_backward,
    mzi_forward,
)
from .oracles import OracleSpec
from .timebin import (
    FORWARD,
    DEFAULT_UNIT_NS,
    BitString,
    TimeBinState,
    all_bitstrings,
    apply_phase_pattern,
    bits_to_index,
    bitstring_to_bin,
    format_bits,
    index_to_bits,
    superpose,
    total_probability,
)

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Raised when an experiment configuration fails validation."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Imperfections:
    """Controllable departures from the ideal setup.

    eps
        Coupler imbalance: input couplers get transmittance ``+eps`` and
        output couplers ``-eps`` relative to their nominal value.
    sigma_phi
        Standard deviation (rad) of an independent Gaussian phase on each
        long-arm traversal, drawn separately forward and backward.
    v
        Residual coherence multiplying every cross term between distinct
        paths in an interference bin.
    """

    eps: float = 0.0
    sigma_phi: float = 0.0
    v: float = 1.0

    @property
    def is_ideal(self) -> bool:
        return self.eps == 0.0 and self.sigma_phi == 0.0 and self.v == 1.0


PRESETS = {
    "ideal": Imperfections(),
    # With the default detector and photon numbers: n=3 visibilities of
    # 97.1-97.9 %, n=2 visibilities of 97.2-97.9 %.
    "paper-like": Imperfections(eps=0.03, sigma_phi=0.12, v=0.995),
}


def default_deltas(n: int) -> tuple[int, ...]:
    return tuple(2 ** l for l in range(n))


def default_arm_lengths(n: int) -> tuple[int, ...]:
    """``L_l = 2**(n+l) - 1``: collision-free and satisfying the delay-line inequalities."""
    return tuple(2 ** (n + l) - 1 for l in range(1, n + 1))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    deltas: tuple[int, ...] = ()
    arm_Ls: tuple[int, ...] = ()
    phis: tuple[float, ...] = ()
    couplers: tuple[tuple[CouplerSpec, CouplerSpec], ...] = ()
    lossless_routing: bool = False
    # None means both outputs reach a detector without the final coupler.
    final_coupler_transmittance: float | None = 0.5
    imperfections: Imperfections = field(default_factory=Imperfections)
    unit_ns: float = DEFAULT_UNIT_NS

    def __post_init__(self):
        n = self.n
        if not self.deltas:
            object.__setattr__(self, "deltas", default_deltas(n))
        if not self.arm_Ls:
            object.__setattr__(self, "arm_Ls", default_arm_lengths(n))
        if not self.phis:
            object.__setattr__(self, "phis", (0.0,) * n)
        if not self.couplers:
            object.__setattr__(self, "couplers", ((CouplerSpec(), CouplerSpec()),) * n)
        object.__setattr__(self, "deltas", tuple(int(d) for d in self.deltas))
        object.__setattr__(self, "arm_Ls", tuple(int(d) for d in self.arm_Ls))
        object.__setattr__(self, "phis", tuple(float(p) for p in self.phis))
        object.__setattr__(self, "couplers", tuple(tuple(c) for c in self.couplers))

    def with_imperfections(self, imp: Imperfections) -> "ExperimentConfig":
        return replace(self, imperfections=imp)

    def stage(self, l: int, extra_phase: float = 0.0) -> MziSpec:
        """MZI spec of stage ``l`` (0-based) with the coupler imbalance applied."""
        cin, cout = self.couplers[l]
        eps = self.imperfections.eps
        if eps:
            cin = CouplerSpec(cin.transmittance + eps, cin.excess_loss)
            cout = CouplerSpec(cout.transmittance - eps, cout.excess_loss)
        return MziSpec(self.deltas[l], self.phis[l] + extra_phase, cin, cout)

    def arm(self, l: int) -> OutputArmSpec:
        # The first delay line has no isolator; the others block forward light.
        return OutputArmSpec(self.arm_Ls[l], has_isolator=l > 0)

    @property
    def interference_offset(self) -> int:
        return sum(self.deltas)

    def interference_time(self, z: Sequence[int]) -> int:
        return self.interference_offset + bitstring_to_bin(z, self.arm_Ls)


# validation

def achievable_offsets(deltas: Sequence[int]) -> dict[int, list[tuple[int, ...]]]:
    """Map each offset ``sum c_l delta_l`` (``c_l = x_l + y_l``) to the ``c`` reaching it."""
    out: dict[int, list[tuple[int, ...]]] = {}
    for c in itertools.product((0, 1, 2), repeat=len(deltas)):
        out.setdefault(sum(ci * d for ci, d in zip(c, deltas)), []).append(c)
    return out


def output_bin_labels(config: ExperimentConfig) -> dict[int, list[tuple[int, BitString]]]:
    """Arrival time -> list of ``(offset, z)`` pairs landing there."""
    labels: dict[int, list[tuple[int, BitString]]] = {}
    offsets = sorted(achievable_offsets(config.deltas))
    for z in all_bitstrings(config.n):
        zl = bitstring_to_bin(z, config.arm_Ls)
        for o in offsets:
            labels.setdefault(o + zl, []).append((o, z))
    return labels


def delay_inequality_failures(config: ExperimentConfig) -> list[str]:
    """Which of ``L_n > 2 L_{n-1} > ... > 2^{n-1} L_1 > 2^n delta_n`` fail."""
    L, d, n = config.arm_Ls, config.deltas, config.n
    if n < 1 or len(L) != n or len(d) != n:
        return ["field lengths do not match n"]
    out = []
    if not L[0] > 2 * d[-1]:
        out.append(f"L_1 > 2*delta_{n} fails ({L[0]} <= {2 * d[-1]})")
    for l in range(n - 1):
        if not L[l + 1] > 2 * L[l]:
            out.append(f"L_{l + 2} > 2*L_{l + 1} fails ({L[l + 1]} <= {2 * L[l]})")
    return out


def delay_inequalities_hold(config: ExperimentConfig) -> bool:
    return not delay_inequality_failures(config)


def _check_fields(config: ExperimentConfig) -> list[str]:
    v: list[str] = []
    n = config.n
    if n < 1:
        return [f"n must be >= 1, got {n}"]
    for name in ("deltas", "arm_Ls", "phis", "couplers"):
        if len(getattr(config, name)) != n:
            v.append(f"{name} has {len(getattr(config, name))} entries, expected n={n}")
    if v:
        return v
    for l, d in enumerate(config.deltas, 1):
        if d < 1:
            v.append(f"deltas[{l}] = {d} must be a positive integer")
    for l, L in enumerate(config.arm_Ls, 1):
        if L < 0:
            v.append(f"arm_Ls[{l}] = {L} must be >= 0")
    for l, p in enumerate(config.phis, 1):
        if not (math.isfinite(p) and 0.0 <= p < TWO_PI):
            v.append(f"phis[{l}] = {p} outside [0, 2pi)")
    imp = config.imperfections
    for l, (cin, cout) in enumerate(config.couplers, 1):
        for which, c, sign in (("in", cin, 1), ("out", cout, -1)):
            t = c.transmittance + sign * imp.eps
            if not 0.0 <= t <= 1.0:
                v.append(f"stage {l} {which}-coupler transmittance {t:g} (with eps) outside [0, 1]")
    if not (math.isfinite(imp.sigma_phi) and imp.sigma_phi >= 0):
        v.append(f"imperfections.sigma_phi = {imp.sigma_phi} must be >= 0")
    if not 0.0 <= imp.v <= 1.0:
        v.append(f"imperfections.v = {imp.v} outside [0, 1]")
    T = config.final_coupler_transmittance
    if T is not None and not 0.0 <= T <= 1.0:
        v.append(f"final coupler transmittance {T} outside [0, 1]")
    return v


def validate_config(config: ExperimentConfig, max_report: int = 5) -> list[str]:
    """List every problem with ``config``; an empty list means valid.

    Besides field ranges this enumerates all output bins and reports
    arrival-time collisions between distinct ``(offset, z)`` pairs, with
    collisions touching an interference bin flagged separately.  Whether
    the delay-line inequalities hold is available from
    :func:`delay_inequalities_hold`; they are neither necessary nor
    sufficient for a collision-free layout, so they are not a violation.
    """
    violations = _check_fields(config)
    if violations:
        return violations

    offsets = achievable_offsets(config.deltas)
    I = config.interference_offset
    if offsets[I] != [(1,) * config.n]:
        others = [c for c in offsets[I] if c != (1,) * config.n]
        violations.append(
            f"interference offset {I} is also reached by non-interfering paths "
            f"(x+y = {others[0]})"
        )

    general, interference = [], []
    for t, pairs in sorted(output_bin_labels(config).items()):
        if len(pairs) < 2:
            continue
        desc = ", ".join(f"(offset {o}, z={format_bits(z)})" for o, z in pairs)
        if any(o == I for o, _ in pairs):
            interference.append(f"interference bin collision at t={t}: {desc}")
        else:
            general.append(f"bin collision at t={t}: {desc}")
    for kind, items in (("interference", interference), ("bin", general)):
        violations.extend(items[:max_report])
        if len(items) > max_report:
            violations.append(f"... {len(items) - max_report} more {kind} collisions")
    if interference or general:
        violations.extend(f"delay-line inequality {f}" for f in delay_inequality_failures(config))
    return violations


@functools.lru_cache(maxsize=256)
def _require_valid(config: ExperimentConfig) -> None:
    violations = validate_config(config)
    if violations:
        raise ConfigError(violations)


# propagation

@dataclass
class PropagationResult:
    """Output of the return pass.

    ``full_state`` holds every bin reached by at least one path (bins that
    interfere to zero are kept).  ``interference`` is indexed by the
    physical ``z`` (``z_1`` most significant) and holds amplitudes before
    the final coupler.
    """

    full_state: TimeBinState
    interference: np.ndarray
    discarded_power: float
    labels: dict[int, tuple[int, BitString]]

    @property
    def occupied_bins(self) -> int:
        return len(self.full_state)

    @property
    def interference_power(self) -> float:
        return float(np.sum(np.abs(self.interference) ** 2))


def _phase_offsets(n: int, extra: Sequence[float] | None) -> Sequence[float]:
    if extra is None:
        return (0.0,) * n
    if len(extra) != n:
        raise ValueError(f"expected {n} phase offsets, got {len(extra)}")
    return extra


def forward_pass(config: ExperimentConfig, phase_offsets: Sequence[float] | None = None) -> TimeBinState:
    """Pulse train arriving at the mirror from a unit input pulse.

    Light leaving a stage through its spare port is lost: it runs into the
    next stage's isolated delay line, or into the unconnected pigtail after
    the last stage.
    """
    _require_valid(config)
    extra = _phase_offsets(config.n, phase_offsets)
    state = TimeBinState({0: 1.0}, n=config.n, unit_ns=config.unit_ns, direction=FORWARD)
    for l in range(config.n):
        state, _ = mzi_forward(state, config.stage(l, extra[l]))
    return state


def apply_oracle_modulation(state: TimeBinState, oracle: OracleSpec, config: ExperimentConfig) -> TimeBinState:
    if oracle.n != config.n:
        raise ValueError(f"oracle has n={oracle.n}, setup has n={config.n}")
    pattern = {}
    for x in all_bitstrings(config.n):
        if oracle(x):
            pattern[bitstring_to_bin(x, config.deltas)] = math.pi
    return apply_phase_pattern(state, pattern)


def backward_pass(
    state: TimeBinState,
    config: ExperimentConfig,
    phase_offsets: Sequence[float] | None = None,
) -> PropagationResult:
    """Return trip from the modulator to the final coupler."""
    _require_valid(config)
    extra = _phase_offsets(config.n, phase_offsets)
    if state.direction == FORWARD:
        state = faraday_reflect(state)
    a, b = state, state.replace({})
    for l in reversed(range(config.n)):
        spec = config.stage(l)
        a, b = mzi_backward(a, b, spec, phi=spec.phi + extra[l])
        b = arm_propagate(b, config.arm(l))
    full = superpose([a, b])

    labels = {t: pairs[0] for t, pairs in output_bin_labels(config).items()}
    amps = np.array(
        [full[config.interference_time(z)] for z in all_bitstrings(config.n)],
        dtype=complex,
    )
    discarded = total_probability(full) - float(np.sum(np.abs(amps) ** 2))
    return PropagationResult(full, amps, max(discarded, 0.0), labels)


def extract_interference_bins(result: PropagationResult, config: ExperimentConfig) -> dict[BitString, complex]:
    return {z: complex(result.interference[i]) for i, z in enumerate(all_bitstrings(config.n))}


def propagate(
    config: ExperimentConfig,
    oracle: OracleSpec,
    forward_offsets: Sequence[float] | None = None,
    backward_offsets: Sequence[float] | None = None,
) -> PropagationResult:
    fwd = forward_pass(config, forward_offsets)
    return backward_pass(apply_oracle_modulation(fwd, oracle, config), config, backward_offsets)


# relabeling

def relabel_physical_to_logical(z: Sequence[int]) -> BitString:
    """``z'_l = z_l xor z_{l+1}`` with ``z_{n+1} = 0``."""
    z = tuple(int(b) for b in z)
    return tuple(z[l] ^ (z[l + 1] if l + 1 < len(z) else 0) for l in range(len(z)))


def relabel_logical_to_physical(w: Sequence[int]) -> BitString:
    z = [0] * len(w)
    nxt = 0
    for l in reversed(range(len(w))):
        z[l] = int(w[l]) ^ nxt
        nxt = z[l]
    return tuple(z)


def logical_permutation(n: int) -> np.ndarray:
    """``perm[physical_index] = logical_index``."""
    return np.array([bits_to_index(relabel_physical_to_logical(z)) for z in all_bitstrings(n)])


def physical_for_logical(config: ExperimentConfig, w: Sequence[int]) -> tuple[BitString, int]:
    """Physical ``z`` and its arrival time for logical outcome ``w``."""
    z = relabel_logical_to_physical(w)
    return z, config.interference_time(z)


# detection-side bookkeeping

def final_coupler_weights(config: ExperimentConfig) -> np.ndarray:
    """Power fraction reaching the detector for each physical ``z``.

    Outputs with ``z_1 = 0`` are transmitted by the final coupler, those
    with ``z_1 = 1`` are reflected into the detector arm.
    """
    T = config.final_coupler_transmittance
    weights = np.ones(2 ** config.n)
    if T is None or config.lossless_routing:
        return weights
    for i, z in enumerate(all_bitstrings(config.n)):
        weights[i] = T if z[0] == 0 else 1.0 - T
    return weights


def routing_gain(config: ExperimentConfig) -> float:
    """Power gain on the interference bins when switches replace couplers.

    Switches route every returning pulse into an interference bin, which
    recovers the ``2**-n`` filtering loss.
    """
    return 2.0 ** config.n if config.lossless_routing else 1.0


def modulator_amplitudes(config: ExperimentConfig, oracle: OracleSpec | None = None) -> np.ndarray:
    """Forward pulse amplitudes at the modulator, normalized to unit total power.

    Indexed by ``x`` (``x_1`` most significant), oracle signs included.
    """
    fwd = forward_pass(config)
    amps = np.array([fwd[bitstring_to_bin(x, config.deltas)] for x in all_bitstrings(config.n)])
    amps = amps / math.sqrt(total_probability(fwd))
    if oracle is not None:
        amps = amps * np.array(oracle.signs())
    return amps


@functools.lru_cache(maxsize=64)
def path_transfer_matrix(config: ExperimentConfig) -> np.ndarray:
    """``T[z, x]``: detector amplitude in physical interference bin ``z`` per
    unit amplitude leaving the modulator in pulse ``x``.

    Includes the final coupler and the switch gain.  Each entry is a
    single optical path, since ``y = 1 - x`` is forced in an interference
    bin.
    """
    _require_valid(config)
    N = 2 ** config.n
    T = np.zeros((N, N), dtype=complex)
    for xi, x in enumerate(all_bitstrings(config.n)):
        pulse = TimeBinState({bitstring_to_bin(x, config.deltas): 1.0}, n=config.n, unit_ns=config.unit_ns)
        T[:, xi] = backward_pass(pulse, config).interference
    T *= np.sqrt(final_coupler_weights(config) * routing_gain(config))[:, None]
    T.setflags(write=False)
    return T


def _require_ideal(config: ExperimentConfig) -> None:
    if not config.imperfections.is_ideal:
        raise ValueError("run_ideal needs ideal imperfections (eps=0, sigma_phi=0, v=1)")


def run_ideal(config: ExperimentConfig, oracle: OracleSpec) -> np.ndarray:
    """Detected outcome distribution over logical ``z`` (renormalized)."""
    _require_ideal(config)
    result = propagate(config, oracle)
    power = np.abs(result.interference) ** 2 * final_coupler_weights(config)
    total = power.sum()
    if total <= 0:
        raise ValueError("no light reaches the interference bins")
    dist = np.zeros_like(power)
    dist[logical_permutation(config.n)] = power / total
    return dist


@dataclass(frozen=True)
class LossBudget:
    forward_power: float
    interference_fraction: float
    final_coupler_factor: float

    @property
    def total(self) -> float:
        return self.forward_power * self.interference_fraction * self.final_coupler_factor

    @property
    def loss_db(self) -> float:
        return -10.0 * math.log10(self.total) if self.total > 0 else math.inf


def loss_budget(config: ExperimentConfig, oracle: OracleSpec | None = None) -> LossBudget:
    """Split of the throughput into forward, filtering and final-coupler factors."""
    if config.lossless_routing:
        return LossBudget(1.0, 1.0, 1.0)
    if oracle is None:
        oracle = OracleSpec(config.n, (0,) * 2 ** config.n)
    fwd = forward_pass(config)
    p_fwd = total_probability(fwd)
    result = backward_pass(apply_oracle_modulation(fwd, oracle, config), config)
    powers = np.abs(result.interference) ** 2
    p_int = float(powers.sum())
    p_det = float(np.sum(powers * final_coupler_weights(config)))
    return LossBudget(p_fwd, p_int / p_fwd, p_det / p_int if p_int > 0 else 0.0)


def throughput(config: ExperimentConfig, oracle: OracleSpec | None = None) -> float:
    """Probability that an input photon reaches the detector in an interference bin."""
    return loss_budget(config, oracle).total


def logical_label(config: ExperimentConfig, physical_index: int) -> str:
    return format_bits(relabel_physical_to_logical(index_to_bits(physical_index, config.n)))
