"""Public-goods feedback on the moral attitude of selfish agents.

Provision of public goods is taken proportional to the compliant fraction.
Selfish agents that changed behaviour between two consecutive steps nudge
their field up or down depending on whether the perceived change in
provision confirms or contradicts that behavioural change.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import SpinGrid
from .population import AgentType, Society


@dataclass(frozen=True)
class ProvisionSignal:
    p_cp_now: float
    p_cp_prev: float
    threshold: float

    @property
    def delta(self) -> float:
        return self.p_cp_now - self.p_cp_prev


def compliance_fraction(grid: SpinGrid) -> float:
    return int(np.count_nonzero(grid.spins == 1)) / grid.n_sites


def field_delta(delta_p_cp: float, threshold: float, behavior_delta: int, step: float) -> float:
    """Field change of one selfish agent.

    A provision change at or below the perception threshold, or an unchanged
    behaviour, leaves the field alone.  Otherwise the field moves by ``step``:
    upward when the behavioural change and the provision change point the same
    way, downward when they disagree.
    """
    if threshold < 0:
        raise ValueError(f"perception threshold must be >= 0, got {threshold}")
    if step < 0:
        raise ValueError(f"adaptation step must be >= 0, got {step}")
    if behavior_delta not in (-2, 0, 2):
        raise ValueError(f"behaviour change must be -2, 0 or 2, got {behavior_delta}")
    if abs(delta_p_cp) <= threshold or behavior_delta == 0:
        return 0.0
    same_direction = (delta_p_cp > 0) == (behavior_delta > 0)
    return step if same_direction else -step


def apply_feedback(
    society: Society,
    spins_prev: np.ndarray,
    spins_now: np.ndarray,
    signal: ProvisionSignal,
) -> int:
    """Update the fields of selfish agents in place; returns how many moved."""
    spins_prev = np.asarray(spins_prev)
    spins_now = np.asarray(spins_now)
    if spins_prev.shape != spins_now.shape or spins_now.size != society.n_sites:
        raise ValueError("spin arrays and society must have matching sizes")
    delta = signal.delta
    if abs(delta) <= signal.threshold:
        return 0
    changed = (society.types == AgentType.SELFISH) & (spins_prev != spins_now)
    sites = np.flatnonzero(changed)
    if sites.size == 0:
        return 0
    # behaviour change is +2 where the agent became compliant
    became_compliant = spins_now[sites] > 0
    sign = np.where(became_compliant == (delta > 0), 1.0, -1.0)
    society.fields[sites] += sign * society.adaptation_steps[sites]
    return int(sites.size)
