"""Preset experiments and the parameter-sweep harness."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .population import Composition, InitPolicy
from .simulation import SimulationConfig, run

DESK_DIMS = (256, 256)
MIXED_SHARES = {"b": 0.35, "d": 0.15}
SELFISH_SHARES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
SWEEP_HEADER = ["param", "seed", "mean_a_field", "p_noncp_stationary", "regime"]


@dataclass
class ScenarioPreset:
    name: str
    variants: dict[str, SimulationConfig]
    checks: list[str] = field(default_factory=list)

    @property
    def config(self) -> SimulationConfig:
        return next(iter(self.variants.values()))


def mixed_composition(selfish_share: float) -> Composition:
    """35% copying, 15% random, the given selfish share and ethical agents filling the rest."""
    ethical = 1.0 - MIXED_SHARES["b"] - MIXED_SHARES["d"] - selfish_share
    if ethical < -1e-12:
        raise ValueError(f"selfish share {selfish_share} leaves no room for the fixed b/d shares")
    return Composition({"a": selfish_share, "b": MIXED_SHARES["b"], "c": max(ethical, 0.0), "d": MIXED_SHARES["d"]})


def _base(**kwargs) -> SimulationConfig:
    width, height = DESK_DIMS
    return SimulationConfig(width=width, height=height, **kwargs)


def _pure(name: str, letter: str, init: InitPolicy, checks: list[str]) -> ScenarioPreset:
    variants = {
        f"h{h}": _base(composition={letter: 1.0}, init_policy=init, penalty_h=h, audit_prob=0.1)
        for h in (5, 10)
    }
    return ScenarioPreset(name, variants, checks)


def _fig2(name: str, threshold: float, checks: list[str]) -> ScenarioPreset:
    variants = {
        f"dBmax{dbm}": _base(
            composition={"a": 1.0},
            init_policy=InitPolicy.ALL_NONCOMPLIANT,
            delta_b_max=float(dbm),
            delta_p_min=threshold,
            penalty_h=5,
        )
        for dbm in range(6)
    }
    return ScenarioPreset(name, variants, checks)


def _fig3(name: str, threshold: float, checks: list[str]) -> ScenarioPreset:
    variants = {}
    for share in SELFISH_SHARES:
        for label, dbm in (("feedback", 4.0), ("nofeedback", 0.0)):
            variants[f"a{round(share * 100)}_{label}"] = _base(
                composition=mixed_composition(share),
                init_policy=InitPolicy.PER_TYPE,
                delta_b_max=dbm,
                delta_p_min=threshold,
                penalty_h=5,
            )
    return ScenarioPreset(name, variants, checks)


def _registry() -> dict[str, ScenarioPreset]:
    presets = [
        _pure("fig1a", "a", InitPolicy.ALL_NONCOMPLIANT,
              ["p_noncp(0) = 1", "stationary p_noncp ~ 0.667 (h=5), ~ 0.500 (h=10)"]),
        _pure("fig1b", "b", InitPolicy.ALL_COMPLIANT, ["stationary p_noncp in [0.03, 0.06]"]),
        _pure("fig1c", "c", InitPolicy.ALL_COMPLIANT, ["stationary p_noncp < 0.005"]),
        _pure("fig1d", "d", InitPolicy.ALL_COMPLIANT,
              ["stationary p_noncp ~ 0.400 (h=5), ~ 0.333 (h=10)"]),
        _fig2("fig2-top", 0.01, ["regime flips between dBmax 2 and 3"]),
        _fig2("fig2-bottom", 0.05, ["regime flips between dBmax 4 and 5"]),
        _fig3("fig3a", 0.01, ["feedback at least halves evasion for a-share 50%"]),
        _fig3("fig3b", 0.05, ["reduction smaller than fig3a for a-share >= 30%"]),
    ]
    return {p.name: p for p in presets}


PRESET_NAMES = tuple(_registry())


def preset(name: str) -> ScenarioPreset:
    registry = _registry()
    if name not in registry:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(registry)}")
    return registry[name]


# --- sweeps ---------------------------------------------------------------

SWEEP_PARAMS = {
    "dB_max": "delta_b_max",
    "delta_b_max": "delta_b_max",
    "dp_min": "delta_p_min",
    "delta_p_min": "delta_p_min",
    "share_a": "share_a",
}


@dataclass
class SweepSpec:
    param: str
    values: Sequence[float]
    seeds: Sequence[int]
    base: SimulationConfig = field(
        default_factory=lambda: _base(composition={"a": 1.0}, init_policy=InitPolicy.ALL_NONCOMPLIANT)
    )

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ValueError(f"cannot sweep {self.param!r}; choose from {', '.join(SWEEP_PARAMS)}")
        self.param = SWEEP_PARAMS[self.param]
        self.values = [float(v) for v in self.values]
        self.seeds = [int(s) for s in self.seeds]
        if not self.values:
            raise ValueError("sweep grid is empty")
        if not self.seeds:
            raise ValueError("sweep needs at least one seed")

    def config_for(self, value: float, seed: int) -> SimulationConfig:
        if self.param == "share_a":
            return self.base.replace(composition=mixed_composition(value), seed=seed)
        return self.base.replace(**{self.param: value}, seed=seed)


@dataclass(frozen=True)
class SweepRow:
    param: float
    seed: int
    mean_a_field: float
    p_noncp_stationary: float

    @property
    def compliant(self) -> bool:
        return self.mean_a_field > 0

    @property
    def regime(self) -> str:
        return "compliant" if self.compliant else "noncompliant"


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]

    def majority_compliant(self) -> dict[float, bool]:
        votes: dict[float, list[bool]] = {}
        for row in self.rows:
            votes.setdefault(row.param, []).append(row.compliant)
        return {v: sum(b) * 2 > len(b) for v, b in sorted(votes.items())}

    @property
    def critical(self) -> float | None:
        """Midpoint between the last non-compliant and the first compliant grid value.

        ``None`` when the grid does not bracket a transition.
        """
        majority = self.majority_compliant()
        values = list(majority)
        for k, v in enumerate(values):
            if majority[v]:
                return None if k == 0 else 0.5 * (values[k - 1] + v)
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in self.rows:
            writer.writerow([repr(row.param), row.seed, repr(row.mean_a_field),
                             repr(row.p_noncp_stationary), row.regime])
        return buf.getvalue()


def _run_point(spec: SweepSpec, value: float, seed: int) -> SweepRow:
    result = run(spec.config_for(value, seed))
    mean_field = result.final_mean_a_field
    if np.isnan(mean_field):
        mean_field = 0.0
    return SweepRow(value, seed, mean_field, result.stationary_noncompliance())


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run every (value, seed) pair; rows come back sorted by value then seed."""
    jobs = [(v, s) for v in spec.values for s in spec.seeds]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda job: _run_point(spec, *job), jobs))
    else:
        rows = [_run_point(spec, v, s) for v, s in jobs]
    rows.sort(key=lambda r: (r.param, r.seed))
    return SweepResult(spec, rows)
