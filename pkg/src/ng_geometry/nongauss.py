"""Relative-entropy non-Gaussianity."""

import numpy as np

from .errors import SupportViolation
from .fock import eigh_hermitian, von_neumann_entropy
from .gaussian import covariance_of, h_function

CLAMP_TOL = 1e-9
SUPPORT_EIG_TOL = 1e-12
SUPPORT_WEIGHT_TOL = 1e-10
_LOG_FLOOR = 1e-300


def _clamp(value):
    # roundoff on exactly Gaussian inputs lands in [-1e-9, 0)
    if -CLAMP_TOL <= value < 0:
        return 0.0
    return value


def non_gaussianity(rho):
    """``h(sqrt(det sigma)) - S(rho)`` in nats.

    Equal to the relative entropy between ``rho`` and its reference Gaussian
    state, but needs only the covariance matrix and the spectrum of ``rho``.
    """
    nu = covariance_of(rho).symplectic_eigenvalue
    return _clamp(h_function(nu) - von_neumann_entropy(rho))


def relative_entropy(rho, tau):
    """Quantum relative entropy ``Tr[rho (log rho - log tau)]`` in nats.

    Eigenvalues of ``tau`` below 1e-12 span its numerical kernel; ``rho`` may
    put at most 1e-10 weight there. Tiny positive eigenvalues keep their true
    logarithm so that tails shared by ``rho`` and ``tau`` cancel.

    Raises:
        SupportViolation: when ``rho`` is not supported inside ``tau``, i.e.
            the relative entropy is infinite.
    """
    if rho.dim != tau.dim:
        raise ValueError("states live on different boxes")
    w_tau, v_tau = eigh_hermitian(tau.data)
    # diagonal of rho in tau's eigenbasis
    rho_in_tau = np.einsum("ji,jk,ki->i", v_tau.conj(), rho.data, v_tau).real
    kernel = w_tau < SUPPORT_EIG_TOL
    leaked = float(np.sum(rho_in_tau[kernel]))
    if leaked > SUPPORT_WEIGHT_TOL:
        raise SupportViolation(
            f"weight {leaked:.3e} of rho outside the support of tau", module="nongauss"
        )
    cross = float(np.sum(rho_in_tau * np.log(np.clip(w_tau, _LOG_FLOOR, None))))
    value = -von_neumann_entropy(rho) - cross
    return _clamp(value)
