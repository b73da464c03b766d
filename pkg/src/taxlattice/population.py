"""Agent society: behavioural types, per-agent parameters and their placement."""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .lattice import SpinGrid


class AgentType(enum.IntEnum):
    SELFISH = 0  # a-type
    COPYING = 1  # b-type
    ETHICAL = 2  # c-type
    RANDOM = 3  # d-type

    @property
    def letter(self) -> str:
        return "abcd"[self.value]

    @classmethod
    def from_letter(cls, letter: str) -> "AgentType":
        try:
            return cls("abcd".index(letter.strip().lower()))
        except ValueError:
            raise ValueError(f"unknown agent type {letter!r}, expected one of a, b, c, d") from None


# Parameter ranges in units of J. ``None`` marks a fixed value given separately.
ETHICAL_TEMPERATURE = 5.0
SELFISH_TEMPERATURE = 5.0
COPYING_TEMPERATURE = (1.0, 3.0)
RANDOM_TEMPERATURE = (10.0, 30.0)
ETHICAL_FIELD = (10.0, 20.0)
SELFISH_INITIAL_FIELD = (-20.0, -10.0)

SHARE_TOLERANCE = 1e-9


@dataclass
class Agent:
    type: AgentType
    temperature: float
    field: float
    adaptation_step: float


class Composition(dict):
    """Mapping ``AgentType -> share``; shares must be non-negative and sum to one."""

    def __init__(self, shares: Mapping[AgentType | str, float]):
        normalized = {t: 0.0 for t in AgentType}
        for key, value in shares.items():
            t = key if isinstance(key, AgentType) else AgentType.from_letter(key)
            normalized[t] = float(value)
        for t, share in normalized.items():
            if share < 0 or share > 1 or not np.isfinite(share):
                raise ValueError(f"share of {t.letter}-types must lie in [0, 1], got {share}")
        total = sum(normalized.values())
        if abs(total - 1.0) > SHARE_TOLERANCE:
            raise ValueError(f"composition shares must sum to 1, got {total:.12g}")
        super().__init__(normalized)

    def counts(self, n_sites: int) -> dict[AgentType, int]:
        """Integer type counts summing to ``n_sites`` (largest-remainder rounding).

        Ties in the remainder are broken by type order a, b, c, d.
        """
        exact = {t: self[t] * n_sites for t in AgentType}
        counts = {t: int(np.floor(v)) for t, v in exact.items()}
        missing = n_sites - sum(counts.values())
        order = sorted(AgentType, key=lambda t: (-(exact[t] - counts[t]), t.value))
        for t in order[:missing]:
            counts[t] += 1
        return counts

    def describe(self) -> str:
        return ",".join(f"{t.letter}:{self[t]:g}" for t in AgentType if self[t] > 0)


def _open_uniform(rng: np.random.Generator, low: float, high: float, size=None):
    """Uniform draws strictly inside ``(low, high)``; boundary hits are redrawn."""
    values = rng.uniform(low, high, size)
    if size is None:
        while values <= low or values >= high:
            values = rng.uniform(low, high)
        return float(values)
    bad = (values <= low) | (values >= high)
    while bad.any():
        values[bad] = rng.uniform(low, high, int(bad.sum()))
        bad = (values <= low) | (values >= high)
    return values


def _draw_parameters(agent_type: AgentType, delta_b_max: float, rng: np.random.Generator, size: int):
    if agent_type is AgentType.SELFISH:
        temperature = np.full(size, SELFISH_TEMPERATURE)
        field = _open_uniform(rng, *SELFISH_INITIAL_FIELD, size)
        if delta_b_max > 0:
            step = _open_uniform(rng, 0.0, delta_b_max, size)
        else:
            step = np.zeros(size)
    elif agent_type is AgentType.COPYING:
        temperature = _open_uniform(rng, *COPYING_TEMPERATURE, size)
        field = np.zeros(size)
        step = np.zeros(size)
    elif agent_type is AgentType.ETHICAL:
        temperature = np.full(size, ETHICAL_TEMPERATURE)
        field = _open_uniform(rng, *ETHICAL_FIELD, size)
        step = np.zeros(size)
    else:
        temperature = _open_uniform(rng, *RANDOM_TEMPERATURE, size)
        field = np.zeros(size)
        step = np.zeros(size)
    return temperature, field, step


def sample_agent(agent_type: AgentType, delta_b_max: float, rng: np.random.Generator) -> Agent:
    if delta_b_max < 0:
        raise ValueError(f"delta_b_max must be >= 0, got {delta_b_max}")
    agent_type = AgentType(agent_type)
    temperature, field, step = _draw_parameters(agent_type, delta_b_max, rng, 1)
    return Agent(agent_type, float(temperature[0]), float(field[0]), float(step[0]))


@dataclass
class Society:
    """Per-site agent parameters stored as parallel arrays.

    Only ``fields`` of selfish agents is ever mutated after construction.
    """

    width: int
    height: int
    types: np.ndarray
    temperatures: np.ndarray
    fields: np.ndarray
    adaptation_steps: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.width * self.height

    @property
    def dims(self) -> tuple[int, int]:
        return self.width, self.height

    @property
    def selfish_mask(self) -> np.ndarray:
        return self.types == AgentType.SELFISH

    def agent(self, site: int) -> Agent:
        return Agent(
            AgentType(int(self.types[site])),
            float(self.temperatures[site]),
            float(self.fields[site]),
            float(self.adaptation_steps[site]),
        )

    def type_counts(self) -> dict[AgentType, int]:
        counts = np.bincount(self.types, minlength=len(AgentType))
        return {t: int(counts[t]) for t in AgentType}

    def copy(self) -> "Society":
        return Society(
            self.width,
            self.height,
            self.types.copy(),
            self.temperatures.copy(),
            self.fields.copy(),
            self.adaptation_steps.copy(),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["site_index", "x", "y", "type", "T", "B", "dB"])
        for site in range(self.n_sites):
            x, y = site % self.width, site // self.width
            writer.writerow([
                site,
                x,
                y,
                AgentType(int(self.types[site])).letter,
                repr(float(self.temperatures[site])),
                repr(float(self.fields[site])),
                repr(float(self.adaptation_steps[site])),
            ])
        return buf.getvalue()


def build_society(
    composition: Composition,
    dims: tuple[int, int],
    delta_b_max: float,
    rng: np.random.Generator,
) -> Society:
    """Place agents on a ``(width, height)`` lattice.

    Type counts depend only on the composition and lattice size; the seed only
    moves agents around. Parameters are then drawn type by type (a, b, c, d),
    each block in increasing site order.
    """
    width, height = dims
    if width < 1 or height < 1:
        raise ValueError(f"lattice dims must be positive, got {width}x{height}")
    if delta_b_max < 0:
        raise ValueError(f"delta_b_max must be >= 0, got {delta_b_max}")
    if not isinstance(composition, Composition):
        composition = Composition(composition)
    n = width * height
    counts = composition.counts(n)
    ordered = np.concatenate([np.full(counts[t], t.value, dtype=np.int8) for t in AgentType])
    types = ordered[rng.permutation(n)]

    temperatures = np.empty(n)
    fields = np.empty(n)
    steps = np.empty(n)
    for t in AgentType:
        sites = np.flatnonzero(types == t)
        if sites.size == 0:
            continue
        temp, field, step = _draw_parameters(t, delta_b_max, rng, sites.size)
        temperatures[sites] = temp
        fields[sites] = field
        steps[sites] = step
    return Society(width, height, types, temperatures, fields, steps)


class InitPolicy(enum.Enum):
    ALL_COMPLIANT = "all_compliant"
    ALL_NONCOMPLIANT = "all_noncompliant"
    PER_TYPE = "per_type"


# Mixed societies start with selfish agents evading and everybody else compliant.
DEFAULT_PER_TYPE_START = {
    AgentType.SELFISH: -1,
    AgentType.COPYING: 1,
    AgentType.ETHICAL: 1,
    AgentType.RANDOM: 1,
}


def init_spins(
    policy: InitPolicy | str,
    society: Society,
    per_type: Mapping[AgentType, int] | None = None,
) -> SpinGrid:
    policy = InitPolicy(policy)
    if policy is InitPolicy.ALL_COMPLIANT:
        return SpinGrid.filled(society.width, society.height, 1)
    if policy is InitPolicy.ALL_NONCOMPLIANT:
        return SpinGrid.filled(society.width, society.height, -1)
    start = dict(DEFAULT_PER_TYPE_START)
    if per_type:
        start.update({AgentType(k): int(v) for k, v in per_type.items()})
    lookup = np.array([start[t] for t in AgentType], dtype=np.int8)
    return SpinGrid(society.width, society.height, lookup[society.types])
