"""Quantum SWITCH of two channels and measurement of its control qubit.

Joint states are ordered control first: index ``c * d + s`` for control
``c`` and system level ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channels import KrausChannel, ThermalSpec, thermal_state, thermalizing
from .qcore import DensityOperator, as_matrix, tensor

DEGENERATE_P = 1e-14

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
P0 = np.outer(KET0, KET0)
P1 = np.outer(KET1, KET1)


@dataclass(frozen=True)
class ControlState:
    """Pure control qubit sqrt(alpha)|0> + sqrt(1 - alpha)|1>."""

    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    @property
    def ket(self) -> np.ndarray:
        return np.array([math.sqrt(self.alpha), math.sqrt(1.0 - self.alpha)], dtype=complex)

    @property
    def density(self) -> DensityOperator:
        v = self.ket
        return DensityOperator(np.outer(v, v.conj()))

    @property
    def coherence(self) -> float:
        return math.sqrt(self.alpha * (1.0 - self.alpha))


@dataclass(frozen=True, eq=False)
class SwitchOutcome:
    """Result of measuring the control of a joint state in the |+>, |-> basis.

    ``rho_plus``/``rho_minus`` are ``None`` when the matching probability is
    below ``DEGENERATE_P``.
    """

    joint: DensityOperator
    p_plus: float
    p_minus: float
    rho_plus: Optional[DensityOperator]
    rho_minus: Optional[DensityOperator]

    @property
    def minus_degenerate(self) -> bool:
        return self.rho_minus is None

    @property
    def plus_degenerate(self) -> bool:
        return self.rho_plus is None


def switch_kraus(n1: KrausChannel, n2: KrausChannel) -> list[np.ndarray]:
    """Kraus operators W_ij = |0><0| (x) K2_i K1_j + |1><1| (x) K1_j K2_i."""
    if n1.dim != n2.dim:
        raise ValueError(f"channel dimensions differ: {n1.dim} vs {n2.dim}")
    ops = []
    for k2 in n2.kraus_ops:
        for k1 in n1.kraus_ops:
            ops.append(np.kron(P0, k2 @ k1) + np.kron(P1, k1 @ k2))
    return ops


def switch_apply(n1: KrausChannel, n2: KrausChannel, ctrl: ControlState, rho) -> DensityOperator:
    """Joint control (x) system output of the SWITCH of ``n1`` and ``n2``."""
    m = as_matrix(rho)
    if m.shape != (n1.dim, n1.dim):
        raise ValueError(f"state has shape {m.shape}, channels act on dimension {n1.dim}")
    w = np.stack(switch_kraus(n1, n2))
    joint_in = tensor(ctrl.density, m)
    out = np.einsum("kij,jl,kml->im", w, joint_in, w.conj())
    return DensityOperator(out)


def closed_form_ico(spec: ThermalSpec, rho, alpha: float) -> DensityOperator:
    """SWITCH of two identical thermalizing channels, assembled from T and T rho T."""
    m = as_matrix(rho)
    if m.shape != (spec.dim, spec.dim):
        raise ValueError(f"state has shape {m.shape}, spec has dimension {spec.dim}")
    ctrl = ControlState(alpha)
    t = thermal_state(spec).matrix
    diag = alpha * P0 + (1.0 - alpha) * P1
    off = np.array([[0, 1], [1, 0]], dtype=complex)
    return DensityOperator(np.kron(diag, t) + ctrl.coherence * np.kron(off, t @ m @ t))


def control_blocks(joint) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """The four system blocks <a| joint |b> for control labels a, b in {0, 1}."""
    m = as_matrix(joint)
    d = m.shape[0] // 2
    if m.shape != (2 * d, 2 * d):
        raise ValueError(f"joint state must be 2d x 2d, got {m.shape}")
    return m[:d, :d], m[:d, d:], m[d:, :d], m[d:, d:]


def measure_control_pm(joint) -> SwitchOutcome:
    """Project the control onto |+> and |-> and renormalize the system branches."""
    if not isinstance(joint, DensityOperator):
        joint = DensityOperator(joint)
    b00, b01, b10, b11 = control_blocks(joint)
    branches = []
    for sign in (1.0, -1.0):
        unnorm = 0.5 * (b00 + b11 + sign * (b01 + b10))
        p = float(np.trace(unnorm).real)
        state = DensityOperator(unnorm / p) if p >= DEGENERATE_P else None
        branches.append((max(p, 0.0), state))
    (pp, rp), (pm, rm) = branches
    return SwitchOutcome(joint=joint, p_plus=pp, p_minus=pm, rho_plus=rp, rho_minus=rm)


def switch_measured(n1: KrausChannel, n2: KrausChannel, ctrl: ControlState, rho) -> SwitchOutcome:
    """SWITCH followed by a |+>/|-> control measurement, branch by branch.

    Each branch is sum_ij B_ij rho B_ij^dagger with
    B_ij = (sqrt(a) K2_i K1_j +/- sqrt(1 - a) K1_j K2_i) / sqrt(2), a sum of
    positive terms. This keeps full relative precision when one outcome is
    rare, which projecting the joint state cannot.
    """
    m = as_matrix(rho)
    joint = switch_apply(n1, n2, ctrl, m)
    a0, a1 = math.sqrt(ctrl.alpha), math.sqrt(1.0 - ctrl.alpha)
    k1, k2 = n1.stack, n2.stack
    first = np.einsum("iab,jbc->ijac", k2, k1).reshape(-1, n1.dim, n1.dim)
    second = np.einsum("jab,ibc->ijac", k1, k2).reshape(-1, n1.dim, n1.dim)
    branches = []
    for sign in (1.0, -1.0):
        b = (a0 * first + sign * a1 * second) / math.sqrt(2.0)
        unnorm = np.einsum("kij,jl,kml->im", b, m, b.conj())
        p = float(np.trace(unnorm).real)
        state = DensityOperator(unnorm / p) if p >= DEGENERATE_P else None
        branches.append((p, state))
    (pp, rp), (pm, rm) = branches
    return SwitchOutcome(joint=joint, p_plus=pp, p_minus=pm, rho_plus=rp, rho_minus=rm)


def ico_thermalize(spec: ThermalSpec, rho, alpha: float = 0.5) -> SwitchOutcome:
    """Convenience wrapper: SWITCH two copies of the thermalizing channel and measure."""
    ch = thermalizing(spec)
    return switch_measured(ch, ch, ControlState(alpha), rho)
