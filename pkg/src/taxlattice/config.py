"""Flat ``key = value`` configuration files.

Lines starting with ``#`` and trailing ``# ...`` comments are ignored.
Probabilities accept either fractions (``0.05``) or percentages (``5%``).

Recognised keys::

    dims = 256x256            # or width / height separately
    composition = a:0.5, b:0.35, d:0.15
    share_a = 0.5             # alternative to composition, unset shares are 0
    init = per_type           # all_compliant | all_noncompliant | per_type
    init_a = -1               # per-type start values, used with init = per_type
    audit_prob = 10%
    penalty_h = 5
    delta_b_max = 4
    delta_p_min = 1%
    steps = 200
    seed = 0
    bin_width = 0.5
    feedback = true
"""
from __future__ import annotations

from .population import AgentType, Composition, InitPolicy
from .simulation import SimulationConfig


class ConfigError(ValueError):
    pass


def parse_fraction(text: str) -> float:
    text = text.strip()
    if text.endswith("%"):
        return float(text[:-1]) / 100.0
    return float(text)


def parse_dims(text: str) -> tuple[int, int]:
    parts = text.lower().replace("×", "x").split("x")
    if len(parts) != 2:
        raise ValueError(f"dims must look like WIDTHxHEIGHT, got {text!r}")
    return int(parts[0]), int(parts[1])


def parse_composition(text: str) -> Composition:
    shares = {}
    for item in text.split(","):
        if not item.strip():
            continue
        letter, _, value = item.partition(":")
        if not value:
            raise ValueError(f"composition entries look like 'a:0.5', got {item.strip()!r}")
        shares[letter.strip()] = parse_fraction(value)
    return Composition(shares)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_spin(text: str) -> int:
    value = int(text)
    if value not in (1, -1):
        raise ValueError(f"start spin must be +1 or -1, got {text!r}")
    return value


_SCALARS = {
    "width": int,
    "height": int,
    "audit_prob": parse_fraction,
    "penalty_h": int,
    "delta_b_max": float,
    "delta_p_min": parse_fraction,
    "steps": int,
    "seed": int,
    "bin_width": float,
    "feedback": _parse_bool,
}


def parse_config(text: str, **overrides) -> SimulationConfig:
    """Parse config text into a validated :class:`SimulationConfig`.

    ``overrides`` are applied on top of the file (e.g. CLI flags).
    """
    values: dict = {}
    shares: dict[str, float] = {}
    per_type: dict[AgentType, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        try:
            if key in _SCALARS:
                values[key] = _SCALARS[key](value)
            elif key == "dims":
                values["width"], values["height"] = parse_dims(value)
            elif key == "composition":
                values["composition"] = parse_composition(value)
            elif key.startswith("share_") and len(key) == 7:
                shares[key[-1]] = parse_fraction(value)
            elif key == "init":
                values["init_policy"] = InitPolicy(value.lower())
            elif key.startswith("init_") and len(key) == 6:
                per_type[AgentType.from_letter(key[-1])] = _parse_spin(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    if shares:
        if "composition" in values:
            raise ConfigError("give either 'composition' or 'share_*' keys, not both")
        try:
            values["composition"] = Composition(shares)
        except ValueError as exc:
            raise ConfigError(f"composition: {exc}") from None
    if per_type:
        values["init_per_type"] = per_type
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SimulationConfig(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def format_config(config: SimulationConfig) -> str:
    """Inverse of :func:`parse_config` for the keys it understands."""
    lines = [
        f"dims = {config.width}x{config.height}",
        f"composition = {config.composition.describe()}",
        f"init = {config.init_policy.value}",
    ]
    for t, spin in (config.init_per_type or {}).items():
        lines.append(f"init_{AgentType(t).letter} = {spin}")
    for key in ("audit_prob", "penalty_h", "delta_b_max", "delta_p_min", "steps", "seed", "bin_width"):
        lines.append(f"{key} = {getattr(config, key)!r}")
    lines.append(f"feedback = {str(config.feedback).lower()}")
    return "\n".join(lines) + "\n"
