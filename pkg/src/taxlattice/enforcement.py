"""Random audits and fixed-length forced-compliance penalties."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import SpinGrid


class PenaltyLedger:
    """Remaining forced-compliance steps per site."""

    def __init__(self, n_sites: int):
        self.remaining = np.zeros(n_sites, dtype=np.int64)

    @property
    def locked(self) -> np.ndarray:
        return self.remaining > 0

    def n_locked(self) -> int:
        return int(np.count_nonzero(self.remaining))

    def copy(self) -> "PenaltyLedger":
        other = PenaltyLedger(self.remaining.size)
        other.remaining[:] = self.remaining
        return other


@dataclass
class AuditReport:
    audited: int
    caught: int


def run_audits(
    grid: SpinGrid,
    ledger: PenaltyLedger,
    audit_prob: float,
    penalty_h: int,
    rng: np.random.Generator,
) -> AuditReport:
    """Audit every free site with probability ``audit_prob``.

    One uniform is drawn per site in raster order, penalised sites included, so
    the stream advances by exactly ``N``. Caught evaders are made compliant and
    locked for ``penalty_h`` steps.
    """
    if not 0.0 <= audit_prob <= 1.0:
        raise ValueError(f"audit probability must lie in [0, 1], got {audit_prob}")
    if penalty_h < 1:
        raise ValueError(f"penalty period must be >= 1, got {penalty_h}")
    draws = rng.random(grid.n_sites)
    audited = (draws < audit_prob) & (ledger.remaining == 0)
    caught = audited & (grid.spins == -1)
    grid.spins[caught] = 1
    ledger.remaining[caught] = penalty_h
    return AuditReport(int(audited.sum()), int(caught.sum()))


def tick_penalties(ledger: PenaltyLedger) -> int:
    """Count down every running penalty; returns how many ended this tick."""
    active = ledger.remaining > 0
    ledger.remaining[active] -= 1
    return int(np.count_nonzero(ledger.remaining[active] == 0))
