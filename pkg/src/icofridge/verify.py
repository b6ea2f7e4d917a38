"""Self-consistency checks shared by the ``verify`` command and the test suite.

Each check returns the largest deviation it saw; it passes when that
deviation is within the tolerance. Checks that compare flags count
disagreements instead and only pass at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    ThermalSpec,
    apply,
    depolarizing,
    random_channel,
    remix,
    thermal_state,
    thermalizing,
)
from .dilation import run_dilation
from .fridge import CycleParams, heat_flows, positive_refrigeration, simulate_success_path
from .qcore import ORACLE_TOL, random_density, random_isometry
from .switch import ControlState, closed_form_ico, measure_control_pm, switch_apply


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_deviation: float
    tolerance: float
    exact: bool = False

    @property
    def passed(self) -> bool:
        if self.exact:
            return bool(self.max_deviation == 0)
        return bool(self.max_deviation <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<22} max deviation {self.max_deviation:.3e} (tolerance {self.tolerance:.1e})"


def _random_draw(rng: np.random.Generator, d: int = 2):
    beta = rng.uniform(0.0, 5.0)
    delta = rng.uniform(0.1, 5.0)
    alpha = rng.uniform(0.0, 1.0)
    spec = ThermalSpec.qubit(beta, delta) if d == 2 else ThermalSpec(beta, tuple(np.sort(rng.uniform(0, 5, d))))
    return spec, random_density(d, rng), alpha


def triple_oracle(trials: int, rng: np.random.Generator) -> tuple[float, float, float]:
    """Pairwise max deviations: (switch vs closed form, switch vs circuit, closed form vs circuit)."""
    worst = np.zeros(3)
    for _ in range(trials):
        spec, rho, alpha = _random_draw(rng)
        ch = thermalizing(spec)
        ctrl = ControlState(alpha)
        s = switch_apply(ch, ch, ctrl, rho).matrix
        c = closed_form_ico(spec, rho, alpha).matrix
        g = run_dilation(ctrl, rho, spec).matrix
        dev = [np.max(np.abs(s - c)), np.max(np.abs(s - g)), np.max(np.abs(c - g))]
        worst = np.maximum(worst, dev)
    return tuple(float(x) for x in worst)


def channel_properties(trials: int, rng: np.random.Generator) -> dict[str, float]:
    """Worst deviations for CPTP completeness, output validity and thermal constancy."""
    worst = dict.fromkeys(["completeness", "trace", "hermiticity", "positivity", "constancy", "depolarizing"], 0.0)
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        n_ops = int(rng.integers(1, 6))
        ch = random_channel(d, n_ops, rng)
        gram = np.einsum("kji,kjl->il", ch.stack.conj(), ch.stack)
        worst["completeness"] = max(worst["completeness"], float(np.max(np.abs(gram - np.eye(d)))))

        rho = random_density(d, rng)
        out = apply(ch, rho).matrix
        worst["trace"] = max(worst["trace"], abs(np.trace(out) - 1.0))
        worst["hermiticity"] = max(worst["hermiticity"], float(np.max(np.abs(out - out.conj().T))))
        worst["positivity"] = max(worst["positivity"], max(0.0, -float(np.linalg.eigvalsh(out)[0])))

        spec = ThermalSpec(rng.uniform(0, 5), tuple(np.sort(rng.uniform(0, 5, d))))
        th = thermalizing(spec)
        a = apply(th, rho).matrix
        b = apply(th, random_density(d, rng)).matrix
        t = thermal_state(spec).matrix
        worst["constancy"] = max(worst["constancy"], float(np.max(np.abs(a - b))), float(np.max(np.abs(a - t))))

        uniform = thermalizing(ThermalSpec(0.0, tuple(range(d))))
        diff = apply(uniform, rho).matrix - apply(depolarizing(d), rho).matrix
        worst["depolarizing"] = max(worst["depolarizing"], float(np.max(np.abs(diff))))
    return worst


def remix_invariance(trials: int, rng: np.random.Generator) -> float:
    """Worst change in the SWITCH output under isometric remixing of each channel's Kraus ops."""
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(2, 4))
        n1 = random_channel(d, int(rng.integers(1, 4)), rng)
        n2 = random_channel(d, int(rng.integers(1, 4)), rng)
        ctrl = ControlState(rng.uniform())
        rho = random_density(d, rng)
        ref = switch_apply(n1, n2, ctrl, rho).matrix
        m1 = remix(n1, random_isometry(len(n1) + int(rng.integers(0, 3)), len(n1), rng))
        m2 = remix(n2, random_isometry(len(n2) + int(rng.integers(0, 3)), len(n2), rng))
        out = switch_apply(m1, m2, ctrl, rho).matrix
        worst = max(worst, float(np.max(np.abs(out - ref))))
    return worst


def probability_sum(trials: int, rng: np.random.Generator) -> float:
    worst = 0.0
    for _ in range(trials):
        spec, rho, alpha = _random_draw(rng)
        out = measure_control_pm(closed_form_ico(spec, rho, alpha))
        worst = max(worst, abs(out.p_plus + out.p_minus - 1.0))
    return worst


def cycle_grid(n: int = 50, lo: float = 0.05, hi: float = 20.0) -> list[CycleParams]:
    """Points (beta_c * delta, beta_h * delta) on an n x n grid with the cold side strictly colder."""
    axis = np.linspace(lo, hi, n)
    return [CycleParams(float(bc), float(bh)) for bc in axis for bh in axis if bc > bh]


def cycle_checks(grid: list[CycleParams]) -> dict[str, float]:
    """Closed-form vs density-matrix heats, conservation, and flag/sign agreement."""
    out = {"appendix_heats": 0.0, "conservation": 0.0, "prc_mismatches": 0.0}
    for p in grid:
        a = heat_flows(p)
        s = simulate_success_path(p)
        dev = max(
            abs(a.q_cold_i - s.q_cold_i),
            abs(a.q_hot_ii - s.q_hot_ii),
            abs(a.q_cold_iii - s.q_cold_iii),
            abs(a.q_cold_cycle - s.q_cold_cycle),
            abs(a.q_cold_cycle - (a.q_cold_i + a.q_cold_iii)),
        )
        out["appendix_heats"] = max(out["appendix_heats"], dev)
        out["conservation"] = max(out["conservation"], abs(a.total), abs(s.total))
        if positive_refrigeration(p) != (a.q_cold_cycle < 0):
            out["prc_mismatches"] += 1
    return out


def run_all(tolerance: float = ORACLE_TOL, trials: int = 100, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []
    sc, sg, cg = triple_oracle(trials, rng)
    results.append(CheckResult("switch==closed_form", sc, tolerance))
    results.append(CheckResult("switch==dilation", sg, tolerance))
    results.append(CheckResult("closed_form==dilation", cg, tolerance))
    for name, dev in channel_properties(trials, rng).items():
        results.append(CheckResult(f"cptp_{name}", dev, tolerance))
    results.append(CheckResult("switch_kraus_remix", remix_invariance(trials, rng), tolerance))
    results.append(CheckResult("p_plus+p_minus", probability_sum(trials, rng), tolerance))
    cyc = cycle_checks(cycle_grid(20))
    results.append(CheckResult("appendix_heats", cyc["appendix_heats"], tolerance))
    results.append(CheckResult("conservation", cyc["conservation"], tolerance))
    results.append(CheckResult("prc_consistency", cyc["prc_mismatches"], tolerance, exact=True))
    return results
