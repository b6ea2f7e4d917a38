"""Thermalizing channels in indefinite causal order and the refrigerator built on them."""

__version__ = "0.1.0"

from .channels import (
    KrausChannel,
    ThermalSpec,
    apply,
    classical_thermalize,
    depolarizing,
    orthogonal_unitary_basis,
    thermal_state,
    thermalizing,
)
from .dilation import build_dilation, run_dilation
from .fridge import (
    AttemptCapExceeded,
    CycleParams,
    CycleReport,
    DegenerateCycle,
    HeatLedger,
    heat_flows,
    positive_refrigeration,
    reservoir_rehomogenize,
    run_cycle_stochastic,
    step_i_state,
    work_and_cop,
)
from .qcore import DensityOperator, partial_trace, shannon_entropy, tensor, validate_density
from .switch import ControlState, SwitchOutcome, closed_form_ico, measure_control_pm, switch_apply
