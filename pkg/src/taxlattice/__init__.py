"""Monte Carlo simulation of tax compliance on a periodic Ising lattice."""
from .config import ConfigError, parse_config
from .dynamics import flip_energy_delta, heatbath_prob, sweep, update_site
from .enforcement import PenaltyLedger, run_audits, tick_penalties
from .feedback import ProvisionSignal, apply_feedback, compliance_fraction, field_delta
from .lattice import SpinGrid, neighbor_sites, neighbor_spin_sum
from .population import (
    Agent,
    AgentType,
    Composition,
    InitPolicy,
    Society,
    build_society,
    init_spins,
    sample_agent,
)
from .scenarios import ScenarioPreset, SweepSpec, preset, run_sweep
from .simulation import (
    FieldHistogram,
    Simulation,
    SimulationConfig,
    StepRecord,
    field_histogram,
    run,
    stationarity_distance,
)

__version__ = "0.1.0"
