"""Single-mode states on a truncated Fock basis.

All matrix functions of Hermitian inputs (log, sqrt, exp of a generator) go
through :func:`eigh_hermitian`, the one spectral primitive of the package.
Entropies are in nats.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.special import entr

from .errors import (
    HermiticityViolation,
    NegativityViolation,
    TraceViolation,
    TruncationLeak,
)

DEFAULT_DIM = 200

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
CLAMP_TOL = 1e-10
TRUNCATION_TOL = 1e-8
NORMALIZATION_TOL = 1e-9


def eigh_hermitian(matrix):
    """Eigendecomposition of a Hermitian matrix, ascending eigenvalues."""
    matrix = np.asarray(matrix)
    return np.linalg.eigh(0.5 * (matrix + matrix.conj().T))


def hermitian_function(matrix, func):
    """Apply ``func`` to the spectrum of a Hermitian matrix."""
    w, v = eigh_hermitian(matrix)
    return (v * func(w)) @ v.conj().T


def top_mass(diagonal):
    """Probability mass on the top 10% of Fock indices."""
    diagonal = np.asarray(diagonal)
    n_top = diagonal.shape[0] // 10
    if n_top == 0:
        return 0.0
    return float(np.sum(diagonal[-n_top:]))


def check_truncation(diagonal, module="fock"):
    mass = top_mass(diagonal)
    if mass > TRUNCATION_TOL:
        raise TruncationLeak(
            f"mass {mass:.3e} in the top 10% of a dim-{len(diagonal)} box "
            f"exceeds {TRUNCATION_TOL:g}; increase dim",
            module=module,
        )


def _readonly(array):
    array = np.array(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix; build it with :func:`make_density`.

    ``data[j, k]`` is ``<j|rho|k>`` in the Fock basis.
    """

    data: np.ndarray

    @property
    def dim(self):
        return self.data.shape[0]

    @cached_property
    def spectrum(self):
        """``(eigenvalues, eigenvectors)``, eigenvalues clamped at zero."""
        w, v = eigh_hermitian(self.data)
        return np.clip(w, 0.0, None), v

    @property
    def eigenvalues(self):
        return self.spectrum[0]

    @property
    def diagonal(self):
        return self.data.diagonal().real.copy()

    def conjugate_by(self, unitary):
        """Return ``U rho U^dagger`` with the truncation guard re-checked."""
        return make_density(unitary @ self.data @ unitary.conj().T)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def make_density(data, check_box=True):
    """Validate a matrix as a density matrix on the truncated Fock basis.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero and the state is
    renormalized to unit trace.

    Raises:
        HermiticityViolation, TraceViolation, NegativityViolation,
        TruncationLeak: naming the first failed invariant.
    """
    data = np.array(data, dtype=complex)
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {data.shape}")

    asym = np.max(np.abs(data - data.conj().T)) if data.size else 0.0
    if asym > HERMITIAN_TOL:
        raise HermiticityViolation(
            f"max |rho - rho^dagger| = {asym:.3e} exceeds {HERMITIAN_TOL:g}",
            module="fock",
        )
    data = 0.5 * (data + data.conj().T)

    trace = np.trace(data).real
    if abs(trace - 1.0) > TRACE_TOL:
        raise TraceViolation(f"trace {trace!r} differs from 1", module="fock")

    w, v = eigh_hermitian(data)
    if w[0] < -CLAMP_TOL:
        raise NegativityViolation(
            f"eigenvalue {w[0]:.3e} below clamp tolerance -{CLAMP_TOL:g}",
            module="fock",
        )
    if w[0] < 0.0:
        w = np.clip(w, 0.0, None)
        data = (v * w) @ v.conj().T
        data = 0.5 * (data + data.conj().T)
    data = data / np.trace(data).real

    if check_box:
        check_truncation(data.diagonal().real, module="fock")
    return DensityMatrix(_readonly(data))


def diagonal_state(probs):
    """Density matrix diagonal in the Fock basis."""
    return make_density(np.diag(np.asarray(probs, dtype=float)))


def fock_state(n, dim):
    probs = np.zeros(dim)
    probs[n] = 1.0
    return diagonal_state(probs)


def pure_state(vector):
    vector = np.asarray(vector, dtype=complex)
    vector = vector / np.linalg.norm(vector)
    return make_density(np.outer(vector, vector.conj()))


@dataclass(frozen=True, eq=False)
class NumberDistribution:
    """Probability vector over Fock numbers 0..N-1."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1:
            raise ValueError("probabilities must form a vector")
        if np.any(probs < 0):
            raise ValueError(f"negative probability {probs.min():.3e}")
        total = probs.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", _readonly(probs))

    def __len__(self):
        return self.probs.shape[0]

    @property
    def mean(self):
        return float(np.arange(len(self)) @ self.probs)

    @property
    def entropy(self):
        return shannon_entropy(self.probs)


def as_probs(dist):
    if isinstance(dist, NumberDistribution):
        return dist.probs
    return np.asarray(dist, dtype=float)


def shannon_entropy(probs):
    """Shannon entropy in nats, with 0 log 0 = 0."""
    return float(np.sum(entr(as_probs(probs))))


def von_neumann_entropy(rho):
    """``-Tr[rho log rho]`` in nats."""
    return float(np.sum(entr(rho.eigenvalues)))


def purity(rho):
    # Tr[rho^2] for Hermitian rho is the squared Frobenius norm
    return float(np.sum(np.abs(rho.data) ** 2))


def mean_photon_number(rho):
    return float(np.arange(rho.dim) @ rho.diagonal)


def number_distribution(rho):
    probs = np.clip(rho.diagonal, 0.0, None)
    return NumberDistribution(probs / probs.sum())


class ModeOperators(NamedTuple):
    a: np.ndarray
    adag: np.ndarray
    q: np.ndarray
    p: np.ndarray
    n: np.ndarray


def annihilation(dim):
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def mode_operators(dim):
    """Mode operators truncated to ``dim`` Fock levels.

    ``q = (a + a^dagger)/sqrt(2)``, ``p = (a - a^dagger)/(sqrt(2) i)``, so the
    vacuum has quadrature variances 1/2.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    a = annihilation(dim)
    adag = a.conj().T
    q = (a + adag) / np.sqrt(2)
    p = (a - adag) / (np.sqrt(2) * 1j)
    n = np.diag(np.arange(dim, dtype=float)).astype(complex)
    return ModeOperators(a, adag, q, p, n)
