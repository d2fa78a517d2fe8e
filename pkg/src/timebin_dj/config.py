"""Key-value configuration files.

One ``key = value`` per line, ``#`` starts a comment.  Lists are comma
separated.  Recognised keys::

    n                            number of stages (required)
    deltas                       MZI delays, bin units         (default 1,2,4,...)
    arm_Ls                       delay lines, bin units        (default 2^(n+l)-1)
    phis                         forward phases, rad, [0, 2pi) (default 0)
    transmittances               one value, or 2n values in,out per stage (default 0.5)
    lossless_routing             true/false                    (default false)
    final_coupler_transmittance  value in [0,1] or "none"      (default 0.5)
    imperfections.preset         ideal | paper-like
    imperfections.eps / .sigma_phi / .v
    source.mu                    photons per pulse at the modulator (default 20 for n<=2, else 50)
    detector.efficiency          (default 0.105)
    detector.dark_rate_per_ns    (default 1e-4)
    detector.gate_ns             (default 5)
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .components import CouplerSpec
from .detection import DetectorModel, SourceModel, default_mu
from .experiment import PRESETS, ExperimentConfig, Imperfections, validate_config


class ConfigFileError(ValueError):
    def __init__(self, message: str, category: str = "config", line: int | None = None, key: str | None = None):
        self.category = category
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key:
            where.append(key)
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class ParsedConfig:
    experiment: ExperimentConfig
    source: SourceModel
    detector: DetectorModel


KEYS = {
    "n", "deltas", "arm_Ls", "phis", "transmittances", "lossless_routing",
    "final_coupler_transmittance",
    "imperfections.preset", "imperfections.eps", "imperfections.sigma_phi", "imperfections.v",
    "source.mu",
    "detector.efficiency", "detector.dark_rate_per_ns", "detector.gate_ns",
}


def _float(value: str, key: str, line: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigFileError(f"expected a number, got {value!r}", line=line, key=key) from None


def _int(value: str, key: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigFileError(f"expected an integer, got {value!r}", line=line, key=key) from None


def _list(value: str, conv, key: str, line: int) -> list:
    items = [v.strip() for v in value.split(",") if v.strip()]
    if not items:
        raise ConfigFileError("empty list", line=line, key=key)
    return [conv(v, key, line) for v in items]


def _bool(value: str, key: str, line: int) -> bool:
    v = value.lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ConfigFileError(f"expected true/false, got {value!r}", line=line, key=key)


def _tokenize(text: str) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigFileError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        if key not in KEYS:
            raise ConfigFileError(f"unknown key {key!r}", line=lineno, key=key)
        if key in entries:
            raise ConfigFileError(f"duplicate key (first set on line {entries[key][1]})", line=lineno, key=key)
        entries[key] = (value, lineno)
    return entries


def _violation_key(message: str) -> str:
    for key in ("deltas", "arm_Ls", "phis", "imperfections.sigma_phi", "imperfections.v"):
        if message.startswith(key):
            return key
    if "coupler transmittance" in message and "final" not in message:
        return "transmittances"
    if message.startswith("final coupler"):
        return "final_coupler_transmittance"
    return "arm_Ls"


def parse_config(text: str) -> ParsedConfig:
    entries = _tokenize(text)
    if "n" not in entries:
        raise ConfigFileError("missing required key 'n'", key="n")

    def get(key, conv, default=None):
        if key not in entries:
            return default
        value, line = entries[key]
        return conv(value, key, line)

    n = get("n", _int)
    if n < 1:
        raise ConfigFileError("n must be >= 1", line=entries["n"][1], key="n")

    kw = {}
    for key, conv in (("deltas", _int), ("arm_Ls", _int), ("phis", _float)):
        if key in entries:
            value, line = entries[key]
            items = _list(value, conv, key, line)
            if len(items) != n:
                raise ConfigFileError(f"expected {n} values, got {len(items)}", line=line, key=key)
            kw[key] = tuple(items)

    if "transmittances" in entries:
        value, line = entries["transmittances"]
        ts = _list(value, _float, "transmittances", line)
        if len(ts) == 1:
            ts = ts * (2 * n)
        if len(ts) != 2 * n:
            raise ConfigFileError(f"expected 1 or {2 * n} values, got {len(ts)}", line=line, key="transmittances")
        try:
            kw["couplers"] = tuple((CouplerSpec(ts[2 * l]), CouplerSpec(ts[2 * l + 1])) for l in range(n))
        except ValueError as exc:
            raise ConfigFileError(str(exc), line=line, key="transmittances") from None

    kw["lossless_routing"] = get("lossless_routing", _bool, False)
    if "final_coupler_transmittance" in entries:
        value, line = entries["final_coupler_transmittance"]
        kw["final_coupler_transmittance"] = None if value.lower() == "none" else _float(value, "final_coupler_transmittance", line)

    imp = Imperfections()
    if "imperfections.preset" in entries:
        value, line = entries["imperfections.preset"]
        if value not in PRESETS:
            raise ConfigFileError(f"unknown preset {value!r} (choose from {', '.join(PRESETS)})", line=line, key="imperfections.preset")
        imp = PRESETS[value]
    imp = replace(
        imp,
        eps=get("imperfections.eps", _float, imp.eps),
        sigma_phi=get("imperfections.sigma_phi", _float, imp.sigma_phi),
        v=get("imperfections.v", _float, imp.v),
    )
    experiment = ExperimentConfig(n, imperfections=imp, **kw)

    violations = validate_config(experiment)
    if violations:
        key = _violation_key(violations[0])
        line = entries[key][1] if key in entries else None
        raise ConfigFileError("; ".join(violations), category="validation", line=line, key=key)

    def build(cls, key, **fields):
        try:
            return cls(**fields)
        except ValueError as exc:
            bad = next((k for k in key if k in entries), None)
            raise ConfigFileError(str(exc), line=entries[bad][1] if bad else None, key=bad) from None

    mu = get("source.mu", _float, default_mu(n))
    source = build(SourceModel, ["source.mu"], mu_at_modulator=mu)
    d = DetectorModel()
    det_keys = ["detector.efficiency", "detector.dark_rate_per_ns", "detector.gate_ns"]
    detector_fields = dict(
        efficiency=get("detector.efficiency", _float, d.efficiency),
        dark_rate_per_ns=get("detector.dark_rate_per_ns", _float, d.dark_rate_per_ns),
        gate_ns=get("detector.gate_ns", _float, d.gate_ns),
    )
    # report the offending key, not just the first detector key present
    for key, field_name in zip(det_keys, detector_fields):
        try:
            replace(d, **{field_name: detector_fields[field_name]})
        except ValueError as exc:
            line = entries[key][1] if key in entries else None
            raise ConfigFileError(str(exc), line=line, key=key) from None
    detector = build(DetectorModel, det_keys, **detector_fields)
    return ParsedConfig(experiment, source, detector)


def load_config(path: str | Path) -> ParsedConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigFileError(f"cannot read {path}: {exc.strerror}", category="io") from None
    return parse_config(text)


def default_config(n: int = 3) -> ParsedConfig:
    return parse_config(f"n={n}\n")
