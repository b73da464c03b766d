"""Time-step orchestration, observables, field histograms and CSV output.

Within one time step the order is fixed:

1. audits of the behaviour observed at the end of the previous step,
2. heat-bath sweep of all sites not serving a penalty,
3. observables recorded,
4. public-goods feedback comparing this observation with the previous one,
5. penalty counters tick down.

Random draws come from a single ``numpy`` generator seeded once per run: the
society is built first, then each step draws ``N`` audit uniforms followed by
``N`` sweep uniforms.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Mapping

import numpy as np

from .dynamics import sweep
from .enforcement import PenaltyLedger, run_audits, tick_penalties
from .feedback import ProvisionSignal, apply_feedback
from .lattice import SpinGrid
from .population import AgentType, Composition, InitPolicy, Society, build_society, init_spins

TIMESERIES_HEADER = ["t", "p_noncp", "p_cp", "audits", "caught", "mean_a_field", "flips"]
HISTOGRAM_HEADER = ["bin_left", "bin_right", "count", "frequency"]


@dataclass(frozen=True)
class SimulationConfig:
    width: int = 1000
    height: int = 1000
    composition: Composition = field(default_factory=lambda: Composition({"a": 1.0}))
    init_policy: InitPolicy = InitPolicy.PER_TYPE
    init_per_type: Mapping[AgentType, int] | None = None
    audit_prob: float = 0.1
    penalty_h: int = 5
    delta_b_max: float = 0.0
    delta_p_min: float = 0.01
    steps: int = 200
    seed: int = 0
    bin_width: float = 0.5
    feedback: bool = True
    check_invariants: bool = False

    def __post_init__(self):
        if not isinstance(self.composition, Composition):
            object.__setattr__(self, "composition", Composition(self.composition))
        object.__setattr__(self, "init_policy", InitPolicy(self.init_policy))
        self.validate()

    def validate(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"dims: lattice dims must be positive, got {self.width}x{self.height}")
        if not 0.0 <= self.audit_prob <= 1.0:
            raise ValueError(f"audit_prob: must lie in [0, 1], got {self.audit_prob}")
        if self.penalty_h < 1:
            raise ValueError(f"penalty_h: must be >= 1, got {self.penalty_h}")
        if self.delta_b_max < 0:
            raise ValueError(f"delta_b_max: must be >= 0, got {self.delta_b_max}")
        if not 0.0 <= self.delta_p_min <= 1.0:
            raise ValueError(f"delta_p_min: must lie in [0, 1], got {self.delta_p_min}")
        if self.steps < 1:
            raise ValueError(f"steps: must be >= 1, got {self.steps}")
        if not self.bin_width > 0:
            raise ValueError(f"bin_width: must be positive, got {self.bin_width}")
        if self.seed < 0:
            raise ValueError(f"seed: must be non-negative, got {self.seed}")

    @property
    def dims(self) -> tuple[int, int]:
        return self.width, self.height

    def replace(self, **changes) -> "SimulationConfig":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class StepRecord:
    t: int
    p_noncp: float
    p_cp: float
    audits: int
    caught: int
    mean_a_field: float
    flips: int

    def as_row(self) -> list:
        return [self.t, repr(self.p_noncp), repr(self.p_cp), self.audits, self.caught,
                repr(self.mean_a_field), self.flips]


@dataclass
class FieldHistogram:
    """Counts of selfish-agent fields in bins ``[k*w, (k+1)*w)``, ``k`` from ``first_bin``."""

    bin_width: float
    first_bin: int
    counts: np.ndarray

    @property
    def empty(self) -> bool:
        return self.counts.size == 0

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def edges(self) -> np.ndarray:
        return (self.first_bin + np.arange(self.counts.size + 1)) * self.bin_width

    @property
    def frequencies(self) -> np.ndarray:
        if self.empty:
            return np.zeros(0)
        return self.counts / self.counts.sum()

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HISTOGRAM_HEADER)
        edges = self.edges
        for k, (count, freq) in enumerate(zip(self.counts, self.frequencies)):
            writer.writerow([repr(float(edges[k])), repr(float(edges[k + 1])), int(count), repr(float(freq))])
        return buf.getvalue()


def field_histogram(fields_or_society, bin_width: float = 0.5) -> FieldHistogram:
    """Histogram of selfish-agent fields on a zero-anchored grid of width ``bin_width``.

    Accepts a :class:`Society` (selfish agents are selected) or a plain array of
    field values.
    """
    if not bin_width > 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    if isinstance(fields_or_society, Society):
        values = fields_or_society.fields[fields_or_society.selfish_mask]
    else:
        values = np.asarray(fields_or_society, dtype=np.float64).reshape(-1)
    if values.size == 0:
        return FieldHistogram(bin_width, 0, np.zeros(0, dtype=np.int64))
    index = np.floor(values / bin_width).astype(np.int64)
    first = int(index.min())
    counts = np.bincount(index - first)
    return FieldHistogram(bin_width, first, counts.astype(np.int64))


def stationarity_distance(a: FieldHistogram, b: FieldHistogram) -> float:
    """Total-variation distance between two normalised field histograms."""
    if a.empty and b.empty:
        raise ValueError("cannot compare two empty histograms")
    if a.empty or b.empty:
        return 1.0
    if not math.isclose(a.bin_width, b.bin_width, rel_tol=0, abs_tol=1e-12):
        raise ValueError("histograms use different bin widths")
    lo = min(a.first_bin, b.first_bin)
    hi = max(a.first_bin + a.counts.size, b.first_bin + b.counts.size)
    pa = np.zeros(hi - lo)
    pb = np.zeros(hi - lo)
    pa[a.first_bin - lo:a.first_bin - lo + a.counts.size] = a.frequencies
    pb[b.first_bin - lo:b.first_bin - lo + b.counts.size] = b.frequencies
    return float(min(1.0, 0.5 * np.abs(pa - pb).sum()))


class Simulation:
    """Mutable state of one run; advance with :meth:`step`."""

    def __init__(self, config: SimulationConfig):
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.society = build_society(config.composition, config.dims, config.delta_b_max, self.rng)
        self.grid = init_spins(config.init_policy, self.society, config.init_per_type)
        self.ledger = PenaltyLedger(self.grid.n_sites)
        self.t = 0
        self._selfish = self.society.selfish_mask
        self._initial_fields = self.society.fields.copy()

    def compliant_count(self) -> int:
        return int(np.count_nonzero(self.grid.spins == 1))

    def mean_selfish_field(self) -> float:
        if not self._selfish.any():
            return math.nan
        return float(self.society.fields[self._selfish].mean())

    def initial_record(self) -> StepRecord:
        p_cp = self.compliant_count() / self.grid.n_sites
        return StepRecord(0, 1.0 - p_cp, p_cp, 0, 0, self.mean_selfish_field(), 0)

    def step(self) -> StepRecord:
        cfg = self.config
        n = self.grid.n_sites
        spins_prev = self.grid.spins.copy()
        compliant_prev = int(np.count_nonzero(spins_prev == 1))

        report = run_audits(self.grid, self.ledger, cfg.audit_prob, cfg.penalty_h, self.rng)
        outcome = sweep(self.grid, self.society, self.ledger.remaining, self.rng)

        compliant = self.compliant_count()
        p_cp = compliant / n
        if cfg.feedback:
            signal = ProvisionSignal(p_cp, compliant_prev / n, cfg.delta_p_min)
            apply_feedback(self.society, spins_prev, self.grid.spins, signal)
        if cfg.check_invariants:
            self._check_invariants()
        tick_penalties(self.ledger)

        self.t += 1
        # enforced flips count as changes in behaviour
        flips = outcome.flips + report.caught
        return StepRecord(self.t, 1.0 - p_cp, p_cp, report.audited, report.caught,
                          self.mean_selfish_field(), flips)

    def _check_invariants(self) -> None:
        locked = self.ledger.remaining > 0
        if np.any(self.grid.spins[locked] != 1):
            raise AssertionError(f"penalised site evading at step {self.t + 1}")
        if np.any(self.ledger.remaining > self.config.penalty_h):
            raise AssertionError("penalty counter exceeds the penalty period")
        others = ~self._selfish
        if np.any(self.society.fields[others] != self._initial_fields[others]):
            raise AssertionError("non-selfish field changed")


@dataclass
class RunResult:
    config: SimulationConfig
    records: list[StepRecord]
    histogram: FieldHistogram
    society: Society
    snapshots: dict[int, FieldHistogram]

    @property
    def p_noncp(self) -> np.ndarray:
        return np.array([r.p_noncp for r in self.records])

    def stationary_noncompliance(self, start: int | None = None, stop: int | None = None) -> float:
        """Mean ``p_noncp`` over steps ``start..stop`` inclusive (default: second half of the run)."""
        last = self.records[-1].t
        if start is None:
            start = last // 2
        if stop is None:
            stop = last
        values = [r.p_noncp for r in self.records if start <= r.t <= stop]
        return float(np.mean(values))

    @property
    def final_mean_a_field(self) -> float:
        return self.records[-1].mean_a_field

    def timeseries_csv(self) -> str:
        return timeseries_csv(self.records)


def run(config: SimulationConfig, snapshot_steps: Iterable[int] = ()) -> RunResult:
    """Run ``config.steps`` steps; ``records[0]`` describes the initial state."""
    sim = Simulation(config)
    wanted = set(snapshot_steps)
    snapshots = {}
    if 0 in wanted:
        snapshots[0] = field_histogram(sim.society, config.bin_width)
    records = [sim.initial_record()]
    for _ in range(config.steps):
        records.append(sim.step())
        if sim.t in wanted:
            snapshots[sim.t] = field_histogram(sim.society, config.bin_width)
    return RunResult(config, records, field_histogram(sim.society, config.bin_width), sim.society, snapshots)


def timeseries_csv(records: Iterable[StepRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TIMESERIES_HEADER)
    for rec in records:
        writer.writerow(rec.as_row())
    return buf.getvalue()


def grid_snapshot(grid: SpinGrid) -> str:
    return grid.to_text()
