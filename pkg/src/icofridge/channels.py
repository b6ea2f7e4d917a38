"""Kraus channels, including the depolarizing and thermalizing families."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qcore import VALIDITY_TOL, DensityOperator, as_matrix, random_isometry


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPTP map given by an ordered list of Kraus operators.

    Completeness (sum of K^dagger K equal to the identity) is checked when
    the channel is built.
    """

    kraus_ops: tuple

    def __post_init__(self):
        ops = [np.array(k, dtype=complex) for k in self.kraus_ops]
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        for k in ops:
            if k.shape != (d, d):
                raise ValueError(f"Kraus operators must all be {d}x{d}, got {k.shape}")
            k.setflags(write=False)
        stack = np.stack(ops)
        stack.setflags(write=False)
        gram = np.einsum("kji,kjl->il", stack.conj(), stack)
        err = np.max(np.abs(gram - np.eye(d)))
        if err > VALIDITY_TOL:
            raise ValueError(f"Kraus operators are not complete (deviation {err:.3g})")
        object.__setattr__(self, "kraus_ops", tuple(ops))
        object.__setattr__(self, "_stack", stack)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    @property
    def stack(self) -> np.ndarray:
        """Kraus operators as one ``(n, d, d)`` array."""
        return self._stack

    def __len__(self) -> int:
        return len(self.kraus_ops)

    def __call__(self, rho) -> DensityOperator:
        return apply(self, rho)


def apply(ch: KrausChannel, rho) -> DensityOperator:
    """Return sum_i K_i rho K_i^dagger."""
    m = as_matrix(rho)
    if m.shape != (ch.dim, ch.dim):
        raise ValueError(f"channel acts on dimension {ch.dim}, state has shape {m.shape}")
    k = ch.stack
    out = np.einsum("kij,jl,kml->im", k, m, k.conj())
    return DensityOperator(out)


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel((np.eye(d),))


PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def orthogonal_unitary_basis(d: int) -> list[np.ndarray]:
    """d^2 unitaries with Tr[U_i^dagger U_j] = d delta_ij.

    Pauli matrices for qubits, Heisenberg-Weyl shift/clock products X^a Z^b
    otherwise.
    """
    if d < 2:
        raise ValueError("basis needs d >= 2")
    if d == 2:
        return [p.copy() for p in PAULIS]
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    mp = np.linalg.matrix_power
    return [mp(shift, a) @ mp(clock, b) for a in range(d) for b in range(d)]


def depolarizing(d: int) -> KrausChannel:
    return KrausChannel(tuple(u / d for u in orthogonal_unitary_basis(d)))


@dataclass(frozen=True)
class ThermalSpec:
    """Inverse temperature together with the energy levels of the system.

    ``beta`` must be finite and non-negative; zero temperature is requested
    with ``zero_temperature=True`` so that Boltzmann weights vanish exactly.
    For a qubit with gap ``delta`` use :meth:`qubit`.
    """

    beta: float
    energies: tuple = field(default=(0.0, 1.0))
    zero_temperature: bool = False

    def __post_init__(self):
        energies = tuple(float(e) for e in self.energies)
        if len(energies) < 2:
            raise ValueError("need at least two energy levels")
        beta = float(self.beta)
        if self.zero_temperature:
            beta = math.inf
        elif not math.isfinite(beta) or beta < 0:
            raise ValueError(f"beta must be finite and >= 0 (use zero_temperature for T=0), got {beta}")
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def qubit(cls, beta: float, delta: float = 1.0) -> "ThermalSpec":
        if not delta > 0:
            raise ValueError(f"gap must be positive, got {delta}")
        if beta == math.inf:
            return cls(0.0, (0.0, delta), zero_temperature=True)
        return cls(beta, (0.0, delta))

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def delta(self) -> float:
        """Gap between the two lowest levels."""
        e = sorted(self.energies)
        return e[1] - e[0]

    @property
    def r(self) -> float:
        """Boltzmann ratio exp(-beta * gap)."""
        if self.zero_temperature:
            return 0.0
        return math.exp(-self.beta * self.delta)

    def _weights(self) -> np.ndarray:
        e = np.asarray(self.energies)
        shifted = e - e.min()
        if self.zero_temperature:
            return (shifted == 0).astype(float)
        return np.exp(-self.beta * shifted)

    @property
    def partition(self) -> float:
        e = np.asarray(self.energies)
        if self.zero_temperature:
            raise ValueError("partition function diverges or vanishes at zero temperature")
        return float(np.sum(np.exp(-self.beta * e)))

    @property
    def populations(self) -> np.ndarray:
        w = self._weights()
        return w / w.sum()

    @property
    def hamiltonian(self) -> np.ndarray:
        return np.diag(np.asarray(self.energies, dtype=complex))


def thermal_state(spec: ThermalSpec) -> DensityOperator:
    return DensityOperator(np.diag(spec.populations).astype(complex))


def thermalizing(spec: ThermalSpec) -> KrausChannel:
    """Constant channel onto ``thermal_state(spec)`` with Kraus ops sqrt(1/d) A U_i."""
    d = spec.dim
    a = np.diag(np.sqrt(spec.populations)).astype(complex)
    scale = math.sqrt(1.0 / d)
    return KrausChannel(tuple(scale * a @ u for u in orthogonal_unitary_basis(d)))


def classical_thermalize(rho, spec: ThermalSpec) -> DensityOperator:
    """Full isochoric thermalization: the output is the thermal state regardless of input."""
    m = as_matrix(rho)
    if m.shape != (spec.dim, spec.dim):
        raise ValueError(f"state has shape {m.shape}, spec has dimension {spec.dim}")
    return thermal_state(spec)


def remix(ch: KrausChannel, v: np.ndarray) -> KrausChannel:
    """Equivalent Kraus representation K'_m = sum_i V[m, i] K_i for an isometry V."""
    v = np.asarray(v)
    if v.shape[1] != len(ch):
        raise ValueError(f"isometry has {v.shape[1]} columns, channel has {len(ch)} ops")
    return KrausChannel(tuple(np.einsum("mi,ijk->mjk", v, ch.stack)))



def random_channel(d: int, n_ops: int, rng: np.random.Generator) -> KrausChannel:
    """Random CPTP map: stacked Kraus operators form a random isometry."""
    v = random_isometry(n_ops * d, d, rng)
    return KrausChannel(tuple(v[i * d:(i + 1) * d, :] for i in range(n_ops)))
