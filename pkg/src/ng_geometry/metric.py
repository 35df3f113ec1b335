"""Fidelity, Bures distance and quantum Fisher information.

Normalization used throughout: the *QFI distance* of a displacement ``dlam``
along ``drho`` is

    D_Q = H(lam) dlam^2 / 2,   H = 2 sum_{nm} |<n|drho|m>|^2 / (rho_n + rho_m)

where ``H`` is the usual (SLD) quantum Fisher information. With this factor
the QFI distance of an eigenvalue perturbation is ``sum_k dp_k^2 / (2 p_k)``,
the first term of the second-order non-Gaussianity, and the distance
relations for thermal states hold as exact identities. Note
``d_B^2 = D_Q / 2`` to leading order.

The quantum Cramer-Rao bound reads ``Var >= 1 / (M H)`` for ``M`` repetitions;
see :func:`cramer_rao_bound`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DivisionGuard
from .fock import as_probs

DIVISION_FLOOR = 1e-300
QFI_SKIP_TOL = 1e-10


def _sqrtm_psd(rho):
    w, v = rho.spectrum
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho1, rho2):
    """Uhlmann root fidelity ``Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))``.

    Evaluated as the trace norm of ``sqrt(rho1) sqrt(rho2)``, which avoids
    taking square roots of roundoff-level eigenvalues of the product.
    """
    if rho1.dim != rho2.dim:
        raise ValueError("states live on different boxes")
    product = _sqrtm_psd(rho1) @ _sqrtm_psd(rho2)
    value = float(np.sum(np.linalg.svd(product, compute_uv=False)))
    return min(max(value, 0.0), 1.0)


def bures_distance_sq(rho1, rho2):
    return 2.0 * (1.0 - fidelity(rho1, rho2))


@dataclass(frozen=True, eq=False)
class TangentDirection:
    """Hermitian, traceless ``d rho / d lambda``."""

    drho: np.ndarray

    def __post_init__(self):
        drho = np.array(self.drho, dtype=complex)
        if np.max(np.abs(drho - drho.conj().T), initial=0.0) > 1e-10:
            raise ValueError("tangent direction must be Hermitian")
        if abs(np.trace(drho)) > 1e-10:
            raise ValueError("tangent direction must be traceless")
        drho = 0.5 * (drho + drho.conj().T)
        drho.setflags(write=False)
        object.__setattr__(self, "drho", drho)

    @classmethod
    def diagonal(cls, dp):
        return cls(np.diag(np.asarray(dp, dtype=float)))


def _as_tangent(drho):
    return drho.drho if isinstance(drho, TangentDirection) else np.asarray(drho)


def quantum_fisher_information(rho, drho):
    """SLD quantum Fisher information ``H`` in the eigenbasis of ``rho``.

    Pairs with ``rho_n + rho_m < 1e-10`` are skipped.
    """
    w, v = rho.spectrum
    d = v.conj().T @ _as_tangent(drho) @ v
    denom = w[:, None] + w[None, :]
    mask = denom >= QFI_SKIP_TOL
    return float(2.0 * np.sum(np.abs(d[mask]) ** 2 / denom[mask]))


def qfi_distance(rho, drho, dlam=1.0):
    """QFI distance ``H dlam^2 / 2`` (see the module docstring)."""
    return 0.5 * quantum_fisher_information(rho, drho) * dlam**2


def classical_fisher_half(p, dp):
    """``sum_k dp_k^2 / (2 p_k)``.

    Raises:
        DivisionGuard: if ``dp_k != 0`` where ``p_k`` vanishes.
    """
    p, dp = as_probs(p), np.asarray(dp, dtype=float)
    active = dp != 0
    bad = active & (p < DIVISION_FLOOR)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise DivisionGuard(
            f"perturbation dp[{k}]={dp[k]:.3e} where p[{k}] vanishes", module="metric"
        )
    return float(np.sum(dp[active] ** 2 / (2.0 * p[active])))


def qfi_finite_difference(state_at, lam0, step=1e-4, richardson=False):
    """QFI distance per unit ``dlam^2`` with a central-difference tangent.

    ``state_at`` maps a parameter value to a :class:`DensityMatrix`. With
    ``richardson=True`` the derivative is extrapolated from steps ``h`` and
    ``h/2``.
    """
    if step <= 0:
        raise ValueError("step must be positive")

    def central(h):
        return (state_at(lam0 + h).data - state_at(lam0 - h).data) / (2.0 * h)

    drho = central(step)
    if richardson:
        drho = (4.0 * central(step / 2) - drho) / 3.0
    return qfi_distance(state_at(lam0), drho, 1.0)


def cramer_rao_bound(qfi, repetitions=1):
    """Smallest variance of an unbiased estimator, ``1 / (M H)``."""
    return 1.0 / (repetitions * qfi)

