"""Unitary circuit reproducing the SWITCH of two thermalizing channels.

Wires, top to bottom: control, system, env1, env2. Reading the circuit left
to right, control |1> swaps system with env1 and then with env2; control |0>
swaps system with env2 and then with env1. Both environments start in the
thermal state and are traced out at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channels import ThermalSpec, thermal_state
from .qcore import VALIDITY_TOL, DensityOperator, as_matrix, partial_trace, tensor
from .switch import ControlState

CONTROL, SYSTEM, ENV1, ENV2 = range(4)


@dataclass(frozen=True, eq=False)
class DilationCircuit:
    d: int
    unitary: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.unitary)
        n = 2 * self.d**3
        if u.shape != (n, n):
            raise ValueError(f"unitary must be {n}x{n}, got {u.shape}")
        if np.max(np.abs(u.conj().T @ u - np.eye(n))) > VALIDITY_TOL:
            raise ValueError("dilation matrix is not unitary")

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (2, self.d, self.d, self.d)


def wire_swap(dims, a: int, b: int) -> np.ndarray:
    """Permutation matrix exchanging wires ``a`` and ``b`` (equal dimension)."""
    dims = list(dims)
    if dims[a] != dims[b]:
        raise ValueError("can only swap wires of equal dimension")
    n = int(np.prod(dims))
    out = np.zeros((n, n), dtype=complex)
    for idx in np.ndindex(*dims):
        j = list(idx)
        j[a], j[b] = j[b], j[a]
        out[np.ravel_multi_index(j, dims), np.ravel_multi_index(idx, dims)] = 1.0
    return out


def controlled(dims, gate: np.ndarray, on: int) -> np.ndarray:
    """Apply ``gate`` (acting on all wires) only when the control wire is in |on>."""
    n = int(np.prod(dims))
    proj = np.zeros((2, 2))
    proj[on, on] = 1.0
    p = np.kron(proj, np.eye(n // 2))
    return p @ gate + (np.eye(n) - p)


@lru_cache(maxsize=None)
def build_dilation(d: int) -> DilationCircuit:
    if d < 2:
        raise ValueError("dilation needs d >= 2")
    dims = (2, d, d, d)
    s_e1 = wire_swap(dims, SYSTEM, ENV1)
    s_e2 = wire_swap(dims, SYSTEM, ENV2)
    gates = [
        controlled(dims, s_e1, 1),
        controlled(dims, s_e2, 1),
        controlled(dims, s_e2, 0),
        controlled(dims, s_e1, 0),
    ]
    u = np.eye(2 * d**3, dtype=complex)
    for g in gates:
        u = g @ u
    u.setflags(write=False)
    return DilationCircuit(d, u)


def dilate(ctrl: ControlState, rho, spec: ThermalSpec) -> DensityOperator:
    """Full four-wire output state of the circuit."""
    m = as_matrix(rho)
    if m.shape != (spec.dim, spec.dim):
        raise ValueError(f"state has shape {m.shape}, spec has dimension {spec.dim}")
    circ = build_dilation(spec.dim)
    t = thermal_state(spec)
    state = tensor(ctrl.density, m, t, t)
    u = circ.unitary
    return DensityOperator(u @ state @ u.conj().T)


def run_dilation(ctrl: ControlState, rho, spec: ThermalSpec) -> DensityOperator:
    """Control (x) system marginal of the circuit output."""
    out = dilate(ctrl, rho, spec)
    return partial_trace(out, build_dilation(spec.dim).dims, [CONTROL, SYSTEM])
