"""Gaussian states, symplectic unitaries and covariance data.

Conventions:

* ``q = (a + a^dagger)/sqrt(2)``, ``p = (a - a^dagger)/(sqrt(2) i)``; the
  vacuum covariance matrix is ``identity/2``.
* Displacement ``D(alpha) = exp(alpha a^dagger - alpha^* a)``.
* Squeezing ``S(xi) = exp((xi^* a^2 - xi a^dagger^2)/2)``. For real
  ``xi = r > 0`` the ``q`` quadrature is squeezed: the squeezed vacuum has
  covariance ``diag(exp(-2r), exp(2r))/2``. For ``xi = r exp(i theta)`` the
  squeezed quadrature is ``q cos(theta/2) + p sin(theta/2)``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from . import fock
from .errors import DomainError, TruncationLeak, UncertaintyViolation

logger = logging.getLogger(__name__)

THERMAL_TAIL_TOL = 1e-12
UNITARITY_TOL = 1e-8
UNCERTAINTY_TOL = 1e-8
MAX_SQUEEZING = 1.0


@dataclass(frozen=True)
class GaussianParams:
    """Thermal occupancy, complex squeezing and complex displacement."""

    n_bar: float = 0.0
    xi: complex = 0.0
    alpha: complex = 0.0

    def __post_init__(self):
        if not self.n_bar >= 0:
            raise ValueError(f"n_bar must be >= 0, got {self.n_bar}")
        if abs(self.xi) > MAX_SQUEEZING:
            raise ValueError(f"|xi| = {abs(self.xi):.3g} exceeds {MAX_SQUEEZING}")

    @property
    def mean_photon_number(self):
        r = abs(self.xi)
        return (self.n_bar + 0.5) * math.cosh(2 * r) - 0.5 + abs(self.alpha) ** 2


@dataclass(frozen=True, eq=False)
class CovarianceData:
    """Quadrature covariance matrix and mean vector ``(<q>, <p>)``."""

    sigma: np.ndarray
    mean: np.ndarray

    def __post_init__(self):
        sigma = np.array(self.sigma, dtype=float).reshape(2, 2)
        mean = np.array(self.mean, dtype=float).reshape(2)
        if abs(sigma[0, 1] - sigma[1, 0]) > 1e-12:
            raise ValueError("covariance matrix must be symmetric")
        sigma = 0.5 * (sigma + sigma.T)
        if np.any(np.diag(sigma) <= 0):
            raise UncertaintyViolation("non-positive quadrature variance", module="gaussian")
        det = np.linalg.det(sigma)
        if det < 0.25 - UNCERTAINTY_TOL:
            raise UncertaintyViolation(
                f"det sigma = {det:.12g} < 1/4; likely a truncation artifact",
                module="gaussian",
            )
        sigma.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "mean", mean)

    @property
    def symplectic_eigenvalue(self):
        return math.sqrt(max(np.linalg.det(self.sigma), 0.25))


def h_function(x):
    """Entropy of a single-mode Gaussian state with symplectic eigenvalue ``x``."""
    if x < 0.5 - 1e-9:
        raise DomainError(f"h(x) needs x >= 1/2, got {x!r}", module="gaussian")
    x = max(float(x), 0.5)
    return float(xlogy(x + 0.5, x + 0.5) - xlogy(x - 0.5, x - 0.5))


def thermal_min_dim(n_bar):
    """Smallest box that passes both the thermal tail guard and the top-10% guard."""
    if n_bar == 0:
        return 2
    ratio = n_bar / (1.0 + n_bar)
    tail = math.log(THERMAL_TAIL_TOL * (1.0 + n_bar)) / math.log(ratio)
    dim = max(2, math.ceil(tail))
    while fock.top_mass(_thermal_weights(n_bar, dim)) > fock.TRUNCATION_TOL:
        dim += max(1, dim // 20)
    return dim


def gaussian_min_dim(params):
    """Box estimate for a displaced squeezed thermal state.

    The photon-number tail of a squeezed thermal state decays like a thermal
    one whose variance is the anti-squeezed quadrature variance.
    """
    n_eff = (params.n_bar + 0.5) * math.exp(2 * abs(params.xi)) - 0.5
    shift = abs(params.alpha)
    return thermal_min_dim(n_eff) + math.ceil(shift**2 + 10 * shift)


def _thermal_weights(n_bar, dim):
    k = np.arange(dim)
    if n_bar == 0:
        return (k == 0).astype(float)
    logp = k * math.log(n_bar / (1.0 + n_bar)) - math.log1p(n_bar)
    return np.exp(logp)


def thermal_probs(n_bar, dim=None):
    """Thermal number distribution ``n^k / (1+n)^(k+1)``, renormalized on the box.

    ``dim=None`` picks ``max(DEFAULT_DIM, thermal_min_dim(n_bar))``.
    """
    if n_bar < 0:
        raise ValueError(f"n_bar must be >= 0, got {n_bar}")
    if dim is None:
        dim = max(fock.DEFAULT_DIM, thermal_min_dim(n_bar))
    weights = _thermal_weights(n_bar, dim)
    if n_bar > 0:
        tail = (n_bar / (1.0 + n_bar)) ** dim
        if tail / (1.0 + n_bar) > THERMAL_TAIL_TOL:
            raise TruncationLeak(
                f"thermal tail {tail:.3e} at n_bar={n_bar} does not fit dim={dim}; "
                f"need dim >= {thermal_min_dim(n_bar)}",
                module="gaussian",
            )
        logger.debug("thermal n_bar=%g dim=%d tail defect %.3e", n_bar, dim, tail)
    return weights / weights.sum()


def thermal_state(n_bar, dim=None):
    return fock.diagonal_state(thermal_probs(n_bar, dim))


def _unitary_from_generator(hamiltonian):
    """``exp(-i H)`` for Hermitian ``H`` via its eigendecomposition."""
    w, v = fock.eigh_hermitian(hamiltonian)
    return (v * np.exp(-1j * w)) @ v.conj().T


def displacement(alpha, dim):
    a = fock.annihilation(dim)
    # -iH = alpha a^dagger - alpha^* a
    return _unitary_from_generator(1j * (alpha * a.conj().T - np.conj(alpha) * a))


def squeezing(xi, dim):
    a = fock.annihilation(dim)
    a2 = a @ a
    # -iH = (xi^* a^2 - xi a^dagger^2)/2
    return _unitary_from_generator(0.5j * (np.conj(xi) * a2 - xi * a2.conj().T))


def symplectic_unitary(params, dim):
    """``D(alpha) S(xi)`` on the truncated basis.

    Raises:
        TruncationLeak: if the unitarity defect on the lower 90% of the box
            exceeds ``UNITARITY_TOL``.
    """
    unitary = np.eye(dim, dtype=complex)
    if params.xi != 0:
        unitary = squeezing(params.xi, dim)
    if params.alpha != 0:
        unitary = displacement(params.alpha, dim) @ unitary
    keep = dim - dim // 10
    gram = unitary @ unitary.conj().T
    defect = np.max(np.abs(gram[:keep, :keep] - np.eye(keep)))
    if defect > UNITARITY_TOL:
        raise TruncationLeak(
            f"unitarity defect {defect:.3e} exceeds {UNITARITY_TOL:g}", module="gaussian"
        )
    return unitary


def gaussian_state(params, dim=None):
    """``D S nu S^dagger D^dagger`` with ``nu`` thermal with ``params.n_bar`` quanta."""
    if dim is None:
        dim = max(fock.DEFAULT_DIM, gaussian_min_dim(params))
    core = thermal_state(params.n_bar, dim)
    if params.xi == 0 and params.alpha == 0:
        return core
    return core.conjugate_by(symplectic_unitary(params, dim))


def covariance_of(rho):
    """Covariance matrix and mean vector of the quadratures.

    Moments come from ``<a>``, ``<a^2>`` and ``<a^dagger a>``, which are exact
    on the truncated basis (unlike ``q @ q`` whose last diagonal entry is cut).
    """
    data = rho.data
    dim = rho.dim
    k = np.arange(1, dim)
    a1 = np.sum(np.sqrt(k) * data[k, k - 1])  # Tr[rho a]
    k2 = np.arange(2, dim)
    a2 = np.sum(np.sqrt(k2 * (k2 - 1)) * data[k2, k2 - 2])  # Tr[rho a^2]
    n = fock.mean_photon_number(rho)

    mean_q = math.sqrt(2) * a1.real
    mean_p = math.sqrt(2) * a1.imag
    qq = n + 0.5 + a2.real
    pp = n + 0.5 - a2.real
    qp = a2.imag
    sigma = np.array(
        [[qq - mean_q**2, qp - mean_q * mean_p], [qp - mean_q * mean_p, pp - mean_p**2]]
    )
    return CovarianceData(sigma, np.array([mean_q, mean_p]))


def williamson_1mode(cov):
    """Single-mode Williamson form ``sigma = sqrt(det sigma) S S^T``.

    Returns ``(n_bar, S)`` with ``S`` the symmetric positive square root of
    ``sigma / sqrt(det sigma)``, hence ``det S = 1``.
    """
    nu = cov.symplectic_eigenvalue
    w, v = np.linalg.eigh(cov.sigma / nu)
    w = np.clip(w, 0.0, None)
    # rescale so det = 1 exactly for a 2x2 matrix
    w = w / math.sqrt(w[0] * w[1])
    s = (v * np.sqrt(w)) @ v.T
    return max(nu - 0.5, 0.0), 0.5 * (s + s.T)


def squeezing_from_symplectic(s):
    """Complex squeezing ``xi`` whose action on the quadratures is ``S``."""
    w, v = np.linalg.eigh(s)
    if abs(w[1] - w[0]) < 1e-14:
        return 0j
    r = -math.log(w[0])
    phi = math.atan2(v[1, 0], v[0, 0])
    return r * complex(math.cos(2 * phi), math.sin(2 * phi))


def reference_gaussian(rho):
    """Gaussian state with the same covariance matrix and means as ``rho``."""
    cov = covariance_of(rho)
    n_bar, s = williamson_1mode(cov)
    xi = squeezing_from_symplectic(s)
    alpha = complex(cov.mean[0], cov.mean[1]) / math.sqrt(2)
    return gaussian_state(GaussianParams(n_bar, xi, alpha), rho.dim)
