"""Dense linear-algebra primitives and density-operator validation.

Matrices are plain ``numpy`` complex arrays. A :class:`DensityOperator`
wraps a read-only copy of one after checking trace, Hermiticity and
positivity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

VALIDITY_TOL = 1e-10
ORACLE_TOL = 1e-12


class DensityError(ValueError):
    """Raised when a matrix is not a valid density operator."""


class NotHermitian(DensityError):
    pass


class NotUnitTrace(DensityError):
    pass


class NotPositive(DensityError):
    pass


def _frozen(m) -> np.ndarray:
    arr = np.array(m, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Unit-trace, Hermitian, positive semidefinite square matrix.

    Validation happens on construction; instances are immutable.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density operator must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > VALIDITY_TOL:
            raise NotHermitian("matrix is not Hermitian within %g" % VALIDITY_TOL)
        tr = np.trace(m)
        if abs(tr - 1.0) > VALIDITY_TOL:
            raise NotUnitTrace(f"trace is {tr.real:.12g}, expected 1")
        lowest = np.linalg.eigvalsh(m)[0]
        if lowest < -VALIDITY_TOL:
            raise NotPositive(f"negative eigenvalue {lowest:.12g}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in ascending order, tiny negatives clamped to zero."""
        return np.clip(np.linalg.eigvalsh(self.matrix), 0.0, None)

    def population(self, level: int) -> float:
        return float(self.matrix[level, level].real)

    def expectation(self, observable) -> float:
        return float(np.trace(self.matrix @ np.asarray(observable)).real)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self) -> str:
        return f"DensityOperator(dim={self.dim})"


def validate_density(m) -> DensityOperator:
    """Wrap ``m`` as a :class:`DensityOperator` or raise the failing invariant."""
    return DensityOperator(m)


def as_matrix(x) -> np.ndarray:
    if isinstance(x, DensityOperator):
        return x.matrix
    return np.asarray(x, dtype=complex)


def tensor(*factors) -> np.ndarray:
    """Kronecker product, row-major block convention, left factor outermost."""
    if not factors:
        raise ValueError("tensor needs at least one factor")
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]) -> DensityOperator:
    """Reduced state on the subsystems listed in ``keep``.

    ``dims`` gives the subsystem dimensions in tensor order. Kept subsystems
    stay in their original relative order regardless of the order of ``keep``.
    """
    m = as_matrix(rho)
    dims = [int(d) for d in dims]
    n = len(dims)
    if int(np.prod(dims)) != m.shape[0] or m.shape[0] != m.shape[1]:
        raise ValueError(f"subsystem dims {dims} do not match matrix shape {m.shape}")
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep must be a non-empty subset of range({n}), got {keep}")

    t = m.reshape(dims + dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out_idx = keep + [k + n for k in keep]
    reduced = np.einsum(t, row + col, out_idx)
    kd = int(np.prod([dims[k] for k in keep]))
    return DensityOperator(reduced.reshape(kd, kd))


def shannon_entropy(p) -> float:
    """Shannon entropy in nats, with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    if abs(p.sum() - 1.0) > VALIDITY_TOL:
        raise ValueError(f"probabilities sum to {p.sum():.12g}, expected 1")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Random density operator from a Ginibre matrix (Hilbert-Schmidt measure for full rank)."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(m / np.trace(m).real)


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """``rows x cols`` matrix V with V^dagger V = I (requires rows >= cols)."""
    g = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
