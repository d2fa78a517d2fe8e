"""Photon counting in the interference bins and the visibility estimator.

Each pulse leaving the modulator is a coherent state, so the photon
number reaching a detection gate is Poissonian.  A gated threshold
detector clicks with probability

    p = 1 - (1 - p_dark) * exp(-eta * mu_bin)

and bins are treated as independent (no dead time between gates).

Monte Carlo runs are cut into fixed-size chunks, each with its own
``SeedSequence`` child, so counts depend only on the seed and never on how
many workers processed the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .experiment import (
    ExperimentConfig,
    logical_permutation,
    modulator_amplitudes,
    path_transfer_matrix,
)
from .oracles import OracleSpec, enumerate_bv_family
from .timebin import all_bitstrings, format_bits, index_to_bits

CHUNK_RUNS = 1 << 16
MAX_VISIBILITY_N = 8


@dataclass(frozen=True)
class SourceModel:
    """Mean photon number per pulse entering the phase modulator."""

    mu_at_modulator: float = 50.0

    def __post_init__(self):
        if not (math.isfinite(self.mu_at_modulator) and self.mu_at_modulator >= 0):
            raise ValueError(f"mu_at_modulator must be finite and >= 0, got {self.mu_at_modulator}")


def default_mu(n: int) -> float:
    """Operating point of the experiment: ~20 photons/pulse for n=2, ~50 for n=3."""
    return 20.0 if n <= 2 else 50.0


def mu_from_laser_photons(photons_per_laser_pulse: float, n: int) -> float:
    """Photons per pulse at the modulator for a given laser pulse energy.

    The forward chain keeps ``2**-n`` of the light, shared over ``2**n``
    pulses.
    """
    return photons_per_laser_pulse * 2.0 ** (-2 * n)


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 0.105
    dark_rate_per_ns: float = 1e-4
    gate_ns: float = 5.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"detector efficiency {self.efficiency} outside [0, 1]")
        if not (math.isfinite(self.dark_rate_per_ns) and self.dark_rate_per_ns >= 0):
            raise ValueError(f"dark rate must be >= 0, got {self.dark_rate_per_ns}")
        if not (math.isfinite(self.gate_ns) and self.gate_ns > 0):
            raise ValueError(f"gate width must be > 0, got {self.gate_ns}")

    @property
    def p_dark(self) -> float:
        return -math.expm1(-self.dark_rate_per_ns * self.gate_ns)


@dataclass
class CountHistogram:
    """Click counts per logical outcome ``z`` (index ``z_1`` most significant)."""

    runs: int
    counts: np.ndarray
    bin_times: np.ndarray
    oracle: str = ""

    @property
    def n(self) -> int:
        return len(self.counts).bit_length() - 1

    def as_dict(self) -> dict[str, int]:
        return {format_bits(index_to_bits(i, self.n)): int(c) for i, c in enumerate(self.counts)}


@dataclass
class VisibilityReport:
    n: int
    V: np.ndarray
    stderr: np.ndarray
    runs: int = 0
    histograms: list[CountHistogram] = field(default_factory=list)

    def rows(self):
        for i in range(2 ** self.n):
            yield format_bits(index_to_bits(i, self.n)), float(self.V[i]), float(self.stderr[i])


# mean photon numbers

def _hamming_matrix(n: int) -> np.ndarray:
    xs = np.array(all_bitstrings(n))
    return (xs[:, None, :] != xs[None, :, :]).sum(axis=2)


def _path_amplitudes(config: ExperimentConfig, oracle: OracleSpec) -> np.ndarray:
    """``a[z, x]``: contribution of path ``x`` to physical bin ``z`` at the detector."""
    return path_transfer_matrix(config) * modulator_amplitudes(config, oracle)[None, :]


def expected_bin_powers(config: ExperimentConfig, oracle: OracleSpec) -> np.ndarray:
    """Mean detected fraction of the light entering the modulator, per logical ``z``.

    Cross terms between paths ``x`` and ``x'`` are scaled by
    ``v * exp(-sigma_phi**2 * hamming(x, x'))``: each differing stage puts a
    forward and a backward jitter term of opposite sign on the pair.
    """
    imp = config.imperfections
    a = _path_amplitudes(config, oracle)
    K = imp.v * np.exp(-imp.sigma_phi ** 2 * _hamming_matrix(config.n))
    np.fill_diagonal(K, 1.0)
    P = np.real(np.einsum("zx,xy,zy->z", a, K, a.conj()))
    out = np.zeros_like(P)
    out[logical_permutation(config.n)] = np.clip(P, 0.0, None)
    return out


def click_probability(mean_photons: np.ndarray | float, detector: DetectorModel) -> np.ndarray:
    m = detector.efficiency * np.asarray(mean_photons, dtype=float)
    return 1.0 - (1.0 - detector.p_dark) * np.exp(-m)


def expected_click_probabilities(
    config: ExperimentConfig, oracle: OracleSpec, source: SourceModel, detector: DetectorModel
) -> np.ndarray:
    """Closed-form click probability per logical bin.

    Exact without phase jitter; with jitter the mean power is used, which
    slightly underestimates the mean click rate of a saturating detector.
    """
    photons = source.mu_at_modulator * 2 ** config.n * expected_bin_powers(config, oracle)
    return click_probability(photons, detector)


def bin_times(config: ExperimentConfig) -> np.ndarray:
    """Arrival time (in bin units) of each logical outcome."""
    times = np.zeros(2 ** config.n, dtype=int)
    perm = logical_permutation(config.n)
    for i, z in enumerate(all_bitstrings(config.n)):
        times[perm[i]] = config.interference_time(z)
    return times


# Monte Carlo

def _seed_sequence(seed, key: tuple[int, ...]) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    return np.random.SeedSequence(seed, spawn_key=key)


def _chunk_sizes(runs: int) -> list[int]:
    full, rest = divmod(runs, CHUNK_RUNS)
    return [CHUNK_RUNS] * full + ([rest] if rest else [])


def _check_runs(runs: int) -> None:
    if not isinstance(runs, (int, np.integer)) or runs < 1:
        raise ValueError(f"runs must be a positive integer, got {runs!r}")


def simulate_counts(
    config: ExperimentConfig,
    oracle: OracleSpec,
    source: SourceModel,
    detector: DetectorModel,
    runs: int,
    seed: int | np.random.SeedSequence = 0,
    workers: int = 1,
) -> CountHistogram:
    """Accumulate clicks in the ``2**n`` interference bins over ``runs`` runs."""
    _check_runs(runs)
    imp = config.imperfections
    n = config.n
    scale = source.mu_at_modulator * 2 ** n * detector.efficiency
    survive_dark = 1.0 - detector.p_dark
    perm = logical_permutation(n)

    if imp.sigma_phi == 0.0:
        p = expected_click_probabilities(config, oracle, source, detector)

        def chunk(args):
            idx, size = args
            rng = np.random.default_rng(_seed_sequence(seed, (idx,)))
            return rng.binomial(size, p)
    else:
        a = _path_amplitudes(config, oracle)
        incoherent = np.sum(np.abs(a) ** 2, axis=1)
        xs = np.array(all_bitstrings(n), dtype=float)

        def chunk(args):
            idx, size = args
            rng = np.random.default_rng(_seed_sequence(seed, (idx,)))
            g_fwd = rng.normal(0.0, imp.sigma_phi, (size, n))
            g_bwd = rng.normal(0.0, imp.sigma_phi, (size, n))
            # path x runs the long arm forward where x_l = 1 and backward where x_l = 0
            theta = g_fwd @ xs.T + g_bwd @ (1.0 - xs).T
            amp = np.exp(1j * theta) @ a.T
            power = imp.v * np.abs(amp) ** 2 + (1.0 - imp.v) * incoherent
            p_phys = 1.0 - survive_dark * np.exp(-scale * power)
            clicks = (rng.random(p_phys.shape) < p_phys).sum(axis=0)
            out = np.zeros(2 ** n, dtype=np.int64)
            out[perm] = clicks
            return out

    jobs = list(enumerate(_chunk_sizes(runs)))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, jobs))
    else:
        parts = [chunk(j) for j in jobs]
    counts = np.sum(parts, axis=0).astype(np.int64)
    return CountHistogram(runs, counts, bin_times(config), oracle.label)


# visibility

def visibility_pairwise(N_z_z: float, N_j_z: float, Nbar_z_z: float) -> float:
    """Half-sum of the two contrasts of bin ``z`` against oracle ``f_j``.

    Returns NaN when a denominator vanishes; callers drop such terms.
    """
    d1, d2 = N_z_z + N_j_z, Nbar_z_z + N_j_z
    if d1 <= 0 or d2 <= 0:
        return math.nan
    return 0.5 * ((N_z_z - N_j_z) / d1 + (Nbar_z_z - N_j_z) / d2)


def _visibility_with_error(f_rates: np.ndarray, fbar_rates: np.ndarray, runs: int) -> tuple[np.ndarray, np.ndarray]:
    """Average ``V_j(z)`` over ``j != z`` plus a delta-method standard error.

    ``f_rates[j, z]`` is the click probability (or frequency) of oracle
    ``f_j`` in bin ``z``; the estimator is scale-free, so the binomial
    variance of each count enters as ``p (1 - p) / runs``.
    """
    N = f_rates.shape[0]
    V = np.full(N, np.nan)
    err = np.full(N, np.nan)
    for z in range(N):
        A, C = f_rates[z, z], fbar_rates[z, z]
        js = [j for j in range(N) if j != z and A + f_rates[j, z] > 0 and C + f_rates[j, z] > 0]
        if not js:
            continue
        B = f_rates[js, z]
        m = len(js)
        V[z] = np.mean([visibility_pairwise(A, b, C) for b in B])
        dA = np.sum(B / (A + B) ** 2) / m
        dC = np.sum(B / (C + B) ** 2) / m
        dB = -(A / (A + B) ** 2 + C / (C + B) ** 2) / m
        var = dA ** 2 * A * (1 - A) + dC ** 2 * C * (1 - C) + np.sum(dB ** 2 * B * (1 - B))
        err[z] = math.sqrt(max(var, 0.0) / runs)
    return V, err


def _bv_split(config: ExperimentConfig) -> tuple[list[OracleSpec], list[OracleSpec]]:
    family = enumerate_bv_family(config.n)
    half = len(family) // 2
    return family[:half], family[half:]


def _check_visibility_n(config: ExperimentConfig) -> None:
    if config.n > MAX_VISIBILITY_N:
        raise ValueError(f"visibility tables are limited to n <= {MAX_VISIBILITY_N}")


def expected_visibility(
    config: ExperimentConfig, source: SourceModel, detector: DetectorModel, runs: int = 500_000
) -> VisibilityReport:
    """Visibility from closed-form click probabilities, with the binomial
    standard error expected at ``runs`` runs per oracle."""
    _check_visibility_n(config)
    fs, fbars = _bv_split(config)
    pf = np.array([expected_click_probabilities(config, o, source, detector) for o in fs])
    pb = np.array([expected_click_probabilities(config, o, source, detector) for o in fbars])
    V, err = _visibility_with_error(pf, pb, runs)
    return VisibilityReport(config.n, V, err, runs)


def visibility_from_histograms(fs: Sequence[CountHistogram], fbars: Sequence[CountHistogram]) -> VisibilityReport:
    runs = fs[0].runs
    if any(h.runs != runs for h in list(fs) + list(fbars)):
        raise ValueError("all histograms must cover the same number of runs")
    pf = np.array([h.counts for h in fs], dtype=float) / runs
    pb = np.array([h.counts for h in fbars], dtype=float) / runs
    V, err = _visibility_with_error(pf, pb, runs)
    return VisibilityReport(fs[0].n, V, err, runs, list(fs) + list(fbars))


def visibility_table(
    config: ExperimentConfig,
    source: SourceModel,
    detector: DetectorModel,
    runs: int,
    seed: int = 0,
    workers: int = 1,
) -> VisibilityReport:
    """Run every ``f_j`` and ``fbar_j`` and average ``V_j(z)`` over ``j != z``.

    Oracle ``k`` of the family draws from the sub-stream ``(seed, k)``.
    """
    _check_visibility_n(config)
    _check_runs(runs)
    fs, fbars = _bv_split(config)
    hists = [
        simulate_counts(config, o, source, detector, runs, _seed_sequence(seed, (k,)), workers)
        for k, o in enumerate(fs + fbars)
    ]
    return visibility_from_histograms(hists[: len(fs)], hists[len(fs) :])


def format_table(report: VisibilityReport, label: str | None = None) -> str:
    """Two-decimal percentage table, one column per logical time bin."""
    zs = [z for z, _, _ in report.rows()]
    width = max(6, report.n + 1)
    head = "z".ljust(10) + "".join(z.rjust(width + 1) for z in zs)
    label = label or f"V(z)^n={report.n}"
    vals = "".join(("   nan" if math.isnan(v) else f"{100 * v:.2f}").rjust(width + 1) for _, v, _ in report.rows())
    return f"{head}\n{label.ljust(10)}{vals}"
