"""Three-step refrigeration cycle driven by SWITCHed cold thermalizations.

Step (i) SWITCHes two cold thermalizing channels on the working qubit and
measures the control, retrying (after a classical cold recovery) until the
control reads |->. Step (ii) thermalizes with the hot reservoir, step (iii)
with the cold reservoir. Heat is counted positive when it flows into a
reservoir, so a negative ``q_cold_cycle`` means the cold side is cooled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channels import ThermalSpec, classical_thermalize, thermal_state
from .qcore import DensityOperator, shannon_entropy
from .switch import DEGENERATE_P, ico_thermalize

DEFAULT_ALPHA = 0.5
MAX_ATTEMPTS = 10**6


class DegenerateCycle(RuntimeError):
    """The |-> outcome of step (i) has (numerically) zero probability."""


class AttemptCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class CycleParams:
    """Reservoir inverse temperatures, gap and control parameter.

    ``beta_r`` (the reservoir used to erase the measurement register)
    defaults to ``beta_h``. Equal cold and hot temperatures are allowed;
    a cold reservoir hotter than the hot one is not.
    """

    beta_c: float
    beta_h: float
    delta: float = 1.0
    beta_r: Optional[float] = None
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if self.beta_r is None:
            object.__setattr__(self, "beta_r", self.beta_h)
        for name in ("beta_c", "beta_h", "delta", "beta_r", "alpha"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.beta_h < 0:
            raise ValueError(f"beta_h must be non-negative, got {self.beta_h}")
        if self.beta_c < self.beta_h:
            raise ValueError(
                f"cold reservoir must not be hotter than the hot one (beta_c={self.beta_c} < beta_h={self.beta_h})"
            )
        if self.beta_r <= 0:
            raise ValueError(f"beta_r must be positive, got {self.beta_r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def cold(self) -> ThermalSpec:
        return ThermalSpec.qubit(self.beta_c, self.delta)

    @property
    def hot(self) -> ThermalSpec:
        return ThermalSpec.qubit(self.beta_h, self.delta)

    @property
    def r_c(self) -> float:
        return math.exp(-self.beta_c * self.delta)

    @property
    def r_h(self) -> float:
        return math.exp(-self.beta_h * self.delta)

    @property
    def analytic(self) -> bool:
        """Closed-form heat flows only hold for an equal superposition of orders."""
        return self.alpha == DEFAULT_ALPHA

    @property
    def carnot_cop(self) -> float:
        if self.beta_c == self.beta_h:
            return math.inf
        return self.beta_h / (self.beta_c - self.beta_h)


@dataclass(frozen=True)
class HeatLedger:
    q_cold_i: float
    q_hot_ii: float
    q_cold_iii: float
    q_cold_cycle: float
    analytic: bool = True

    @property
    def total(self) -> float:
        return self.q_cold_i + self.q_hot_ii + self.q_cold_iii


@dataclass(frozen=True)
class CycleReport:
    params: CycleParams
    ledger: HeatLedger
    p_minus: float
    mean_attempts: float
    entropy_per_measurement: float
    erasure_work: float
    work_per_cycle: float
    cop: float
    prc_satisfied: bool

    @property
    def p_plus(self) -> float:
        return 1.0 - self.p_minus

    @property
    def carnot_cop(self) -> float:
        return self.params.carnot_cop


def _excited(r: float) -> float:
    return r / (1.0 + r)


def _step_i_excited(r_c: float) -> float:
    return (2.0 * r_c + 1.0) / (3.0 * (1.0 + r_c))


def step_i_state(r_c: float) -> DensityOperator:
    """Working-qubit state after a successful (|->) step (i) at alpha = 1/2."""
    if not 0.0 < r_c <= 1.0:
        raise ValueError(f"r_c must lie in (0, 1], got {r_c}")
    ground = (r_c + 2.0) / (3.0 * r_c + 3.0)
    return DensityOperator(np.diag([ground, _step_i_excited(r_c)]).astype(complex))


def _energy(rho: DensityOperator, delta: float) -> float:
    return rho.population(1) * delta


@dataclass(frozen=True)
class BranchStates:
    """Density matrices visited by one cycle, computed by channel simulation."""

    start: DensityOperator
    plus: Optional[DensityOperator]
    minus: DensityOperator
    hot: DensityOperator
    cold: DensityOperator
    p_plus: float
    p_minus: float


def simulate_branches(params: CycleParams) -> BranchStates:
    """Run step (i) through the SWITCH, then the two classical thermalizations."""
    start = thermal_state(params.cold)
    out = ico_thermalize(params.cold, start, params.alpha)
    if out.p_minus < DEGENERATE_P or out.rho_minus is None:
        raise DegenerateCycle(f"p_minus = {out.p_minus:.3g} is below {DEGENERATE_P}")
    hot = classical_thermalize(out.rho_minus, params.hot)
    cold = classical_thermalize(hot, params.cold)
    return BranchStates(start, out.rho_plus, out.rho_minus, hot, cold, out.p_plus, out.p_minus)


def simulate_success_path(params: CycleParams) -> HeatLedger:
    """Heat ledger of the successful path obtained from density matrices."""
    b = simulate_branches(params)
    dl = params.delta
    e0, e1, e2, e3 = (_energy(s, dl) for s in (b.start, b.minus, b.hot, b.cold))
    q_i = -(e1 - e0)
    q_ii = -(e2 - e1)
    q_iii = -(e3 - e2)
    return HeatLedger(q_i, q_ii, q_iii, (b.hot.population(1) - b.minus.population(1)) * dl, analytic=False)


def heat_flows(params: CycleParams) -> HeatLedger:
    """Per-cycle heat into each reservoir.

    Closed form at alpha = 1/2, density-matrix simulation otherwise.
    """
    if not params.analytic:
        return simulate_success_path(params)
    r_c, r_h, dl = params.r_c, params.r_h, params.delta
    q_i = (r_c - 1.0) / (3.0 * (1.0 + r_c)) * dl
    q_ii = (_step_i_excited(r_c) - _excited(r_h)) * dl
    q_iii = (_excited(r_h) - _excited(r_c)) * dl
    q_cycle = (_excited(r_h) - _step_i_excited(r_c)) * dl
    return HeatLedger(q_i, q_ii, q_iii, q_cycle, analytic=True)


def positive_refrigeration(params: CycleParams) -> bool:
    """True when step (i) leaves the qubit hotter than the hot reservoir.

    Uses the same two quantities as ``q_cold_cycle`` so the flag and the sign
    of the cycle heat can never disagree.
    """
    if params.analytic:
        return _step_i_excited(params.r_c) > _excited(params.r_h)
    b = simulate_branches(params)
    return b.minus.population(1) > b.hot.population(1)


def p_minus_analytic(params: CycleParams) -> float:
    """Probability of |-> for a cold thermal input: 1/2 - sqrt(a(1-a)) Tr[T^3]."""
    r = params.r_c
    c = math.sqrt(params.alpha * (1.0 - params.alpha))
    # 1 - Tr[T^3] = 3r / (1 + r)^2, written out to avoid cancellation when r is small
    return (0.5 - c) + c * 3.0 * r / (1.0 + r) ** 2


def work_and_cop(params: CycleParams) -> CycleReport:
    """Landauer work per cycle and the coefficient of performance."""
    ledger = heat_flows(params)
    p_minus = p_minus_analytic(params)
    if p_minus < DEGENERATE_P:
        raise DegenerateCycle(f"p_minus = {p_minus:.3g} is below {DEGENERATE_P}")
    entropy = shannon_entropy([1.0 - p_minus, p_minus])
    erasure = entropy / params.beta_r
    work = entropy / (params.beta_r * p_minus)
    cop = -ledger.q_cold_cycle / work
    return CycleReport(
        params=params,
        ledger=ledger,
        p_minus=p_minus,
        mean_attempts=1.0 / p_minus,
        entropy_per_measurement=entropy,
        erasure_work=erasure,
        work_per_cycle=work,
        cop=cop,
        prc_satisfied=positive_refrigeration(params),
    )


@dataclass(frozen=True)
class LedgerEvent:
    step: str
    reservoir: str
    heat: float


REHOMOGENIZE = "rehomogenize"


def reservoir_rehomogenize() -> LedgerEvent:
    """Cold reservoirs equilibrate with each other; ideal reservoirs exchange no accountable heat."""
    return LedgerEvent(REHOMOGENIZE, "cold", 0.0)


@dataclass(frozen=True)
class AttemptHeats:
    """Heat into the reservoirs for each kind of event in one cycle."""

    plus_ico: float
    plus_recovery: float
    minus_ico: float
    hot_ii: float
    cold_iii: float

    @property
    def failed_net(self) -> float:
        return self.plus_ico + self.plus_recovery


def attempt_heats(branches: BranchStates, params: CycleParams) -> AttemptHeats:
    dl = params.delta
    e_start = _energy(branches.start, dl)
    if branches.plus is not None:
        e_plus = _energy(branches.plus, dl)
        e_recovered = _energy(classical_thermalize(branches.plus, params.cold), dl)
        plus_ico = -(e_plus - e_start)
        plus_recovery = -(e_recovered - e_plus)
    else:
        plus_ico = plus_recovery = 0.0
    e_minus = _energy(branches.minus, dl)
    e_hot = _energy(branches.hot, dl)
    e_cold = _energy(branches.cold, dl)
    return AttemptHeats(
        plus_ico=plus_ico,
        plus_recovery=plus_recovery,
        minus_ico=-(e_minus - e_start),
        hot_ii=-(e_hot - e_minus),
        cold_iii=-(e_cold - e_hot),
    )


def cycle_events(heats: AttemptHeats, attempts: int) -> list[LedgerEvent]:
    """Event log for one cycle that needed ``attempts`` measurements."""
    events = []
    for _ in range(attempts - 1):
        events.append(LedgerEvent("i+", "cold", heats.plus_ico))
        events.append(LedgerEvent("recovery", "cold", heats.plus_recovery))
    events.append(LedgerEvent("i-", "cold", heats.minus_ico))
    events.append(LedgerEvent("ii", "hot", heats.hot_ii))
    events.append(LedgerEvent("iii", "cold", heats.cold_iii))
    events.append(reservoir_rehomogenize())
    return events


@dataclass(frozen=True, eq=False)
class StochasticReport:
    """Aggregate of many simulated cycles; per-trial arrays kept for export."""

    params: CycleParams
    seed: int
    trials: int
    p_minus: float
    entropy_per_measurement: float
    heats: AttemptHeats
    attempts: np.ndarray
    q_cold: np.ndarray
    q_hot: np.ndarray
    work: np.ndarray
    rehomogenize_events: int
    max_failed_net: float = field(default=0.0)

    @staticmethod
    def _mean_sem(x: np.ndarray) -> tuple[float, float]:
        n = len(x)
        sem = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
        return float(np.mean(x)), sem

    @property
    def mean_attempts(self) -> tuple[float, float]:
        return self._mean_sem(self.attempts.astype(float))

    @property
    def mean_q_cold(self) -> tuple[float, float]:
        return self._mean_sem(self.q_cold)

    @property
    def mean_q_hot(self) -> tuple[float, float]:
        return self._mean_sem(self.q_hot)

    @property
    def mean_work(self) -> tuple[float, float]:
        return self._mean_sem(self.work)

    @property
    def cop(self) -> float:
        return -float(np.mean(self.q_cold)) / float(np.mean(self.work))


def run_cycle_stochastic(
    params: CycleParams,
    seed: int,
    trials: int,
    max_attempts: int = MAX_ATTEMPTS,
) -> StochasticReport:
    """Monte Carlo over complete cycles with Bernoulli(p_minus) step-(i) outcomes.

    The branch states come from the density-matrix simulation; every failed
    attempt starts again from the cold thermal state, so the same branch
    states apply to every attempt. Each trial draws its outcomes from its own
    stream derived from ``(seed, trial index)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    branches = simulate_branches(params)
    heats = attempt_heats(branches, params)
    entropy = shannon_entropy([branches.p_plus, branches.p_minus])

    streams = np.random.SeedSequence(seed).spawn(trials)
    attempts = np.empty(trials, dtype=np.int64)
    for k, ss in enumerate(streams):
        n = int(np.random.Generator(np.random.PCG64(ss)).geometric(branches.p_minus))
        if n > max_attempts:
            raise AttemptCapExceeded(f"trial {k} needed {n} attempts (cap {max_attempts})")
        attempts[k] = n

    failed = (attempts - 1).astype(float)
    q_cold = failed * heats.failed_net + heats.minus_ico + heats.cold_iii
    q_hot = np.full(trials, heats.hot_ii)
    work = attempts * (entropy / params.beta_r)
    return StochasticReport(
        params=params,
        seed=seed,
        trials=trials,
        p_minus=branches.p_minus,
        entropy_per_measurement=entropy,
        heats=heats,
        attempts=attempts,
        q_cold=q_cold,
        q_hot=q_hot,
        work=work,
        rehomogenize_events=trials,
        max_failed_net=abs(heats.failed_net),
    )
