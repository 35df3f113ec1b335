"""Perturbation families around a thermal state.

Three kinds of perturbation are built here:

* eigenvalue (classical) perturbations ``p -> p + dp`` of a thermal state,
* convex combinations ``(1 - eps) p + eps mu`` with a target distribution,
* Fock-basis coherences ``|j><k|`` with ``|j - k| >= 3``, which leave the
  first and second moments, hence the covariance matrix, untouched.

Because non-Gaussianity is invariant under symplectic unitaries, every
perturbation of a Gaussian state's eigenvalues can be studied on the diagonal
(thermal) state, where it reduces to functions of number distributions.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from . import fock
from .errors import BadSpec, TruncationLeak
from .fock import NumberDistribution, as_probs, make_density, shannon_entropy
from .gaussian import THERMAL_TAIL_TOL, h_function, thermal_min_dim, thermal_probs
from .metric import classical_fisher_half

logger = logging.getLogger(__name__)

TARGET_KINDS = ("poisson", "thermal", "fock", "custom", "random")
MIN_COHERENCE_GAP = 3


@dataclass(frozen=True)
class TargetSpec:
    """Description of a target number distribution.

    ``n_mu`` is the target mean. For ``kind="random"`` it is optional: when
    given, the uniform simplex sample is mixed with the vacuum or with the
    top Fock level of the support until its mean is exactly ``n_mu``.
    """

    kind: str
    n_mu: Optional[float] = None
    custom_probs: Optional[tuple] = None
    support: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in TARGET_KINDS:
            raise BadSpec(f"unknown target kind {self.kind!r}; expected one of {TARGET_KINDS}")
        if self.kind in ("poisson", "thermal", "fock"):
            if self.n_mu is None or self.n_mu < 0:
                raise BadSpec(f"{self.kind} target needs n_mu >= 0")
            if self.custom_probs is not None or self.support is not None:
                raise BadSpec(f"{self.kind} target takes only n_mu")
        if self.kind == "fock" and float(self.n_mu) != int(self.n_mu):
            raise BadSpec("Fock target requires integer n_mu")
        if self.kind == "custom" and self.custom_probs is None:
            raise BadSpec("custom target needs custom_probs")
        if self.kind == "random":
            if self.support is None or self.support < 2 or self.seed is None:
                raise BadSpec("random target needs support >= 2 and a seed")
            if self.n_mu is not None and self.n_mu > self.support - 1:
                raise BadSpec(f"n_mu={self.n_mu} not reachable on support {self.support}")


def poisson_probs(n_mu, dim):
    k = np.arange(dim)
    if n_mu == 0:
        return (k == 0).astype(float)
    tail = float(poisson.sf(dim - 1, n_mu))
    if tail > THERMAL_TAIL_TOL:
        raise TruncationLeak(
            f"Poissonian tail {tail:.3e} at n_mu={n_mu} does not fit dim={dim}",
            module="perturb",
        )
    logger.debug("poisson n_mu=%g dim=%d tail defect %.3e", n_mu, dim, tail)
    probs = np.exp(k * math.log(n_mu) - n_mu - gammaln(k + 1))
    return probs / probs.sum()


def random_simplex(support, rng):
    """Uniform sample on the probability simplex of ``support`` points."""
    weights = rng.exponential(size=support)
    return weights / weights.sum()


def energy_constrained_random(support, n_mu, rng):
    """Uniform simplex sample mixed to have mean exactly ``n_mu``.

    The sample is mixed with the vacuum when its mean is too high and with
    the Fock state ``support - 1`` when it is too low.
    """
    if not 0 <= n_mu <= support - 1:
        raise BadSpec(f"n_mu={n_mu} not reachable on support {support}")
    mu = random_simplex(support, rng)
    k = np.arange(support)
    mean = k @ mu
    if mean > n_mu:
        t = 1.0 - n_mu / mean
        mu = (1.0 - t) * mu
        mu[0] += t
    elif mean < n_mu:
        t = (n_mu - mean) / (support - 1 - mean)
        mu = (1.0 - t) * mu
        mu[-1] += t
    return mu


def required_dim(kind, n_mu):
    """Smallest box that holds a ``kind`` target with mean ``n_mu``."""
    if kind == "thermal":
        return thermal_min_dim(n_mu)
    if kind == "poisson":
        dim = max(16, math.ceil(n_mu + 12 * math.sqrt(n_mu) + 40))
        return dim
    if kind == "fock":
        return math.ceil((int(n_mu) + 2) * 10 / 9)
    return 16


def _embed(probs, dim):
    if len(probs) > dim:
        raise TruncationLeak(f"support {len(probs)} exceeds dim={dim}", module="perturb")
    out = np.zeros(dim)
    out[: len(probs)] = probs
    return out


def target_distribution(spec, dim=None):
    """Number distribution described by ``spec`` on ``dim`` Fock levels."""
    if dim is None:
        dim = fock.DEFAULT_DIM
        if spec.kind in ("poisson", "thermal", "fock"):
            dim = max(dim, required_dim(spec.kind, spec.n_mu))
    if spec.kind == "poisson":
        probs = poisson_probs(spec.n_mu, dim)
    elif spec.kind == "thermal":
        probs = thermal_probs(spec.n_mu, dim)
    elif spec.kind == "fock":
        n = int(spec.n_mu)
        if n >= dim:
            raise TruncationLeak(f"Fock level {n} outside dim={dim}", module="perturb")
        probs = np.zeros(dim)
        probs[n] = 1.0
    elif spec.kind == "custom":
        custom = np.asarray(spec.custom_probs, dtype=float)
        probs = _embed(custom / custom.sum(), dim)
    else:
        rng = np.random.default_rng(spec.seed)
        if spec.n_mu is None:
            probs = random_simplex(spec.support, rng)
        else:
            probs = energy_constrained_random(spec.support, spec.n_mu, rng)
        probs = _embed(probs, dim)
    fock.check_truncation(probs, module="perturb")
    return NumberDistribution(probs)


def convex_combination(p, mu, eps):
    """``(1 - eps) p + eps mu``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    p, mu = as_probs(p), as_probs(mu)
    if p.shape != mu.shape:
        raise ValueError("distributions have different lengths")
    q = (1.0 - eps) * p + eps * mu
    return NumberDistribution(q / q.sum())


def mean_quanta(probs):
    probs = as_probs(probs)
    return float(np.arange(len(probs)) @ probs)


def ng_exact_diagonal(q):
    """Non-Gaussianity of the Fock-diagonal state with number distribution ``q``.

    The reference Gaussian of a diagonal state is thermal with the same mean,
    so the measure is ``h(n + 1/2) - H[q]``.
    """
    value = h_function(mean_quanta(q) + 0.5) - shannon_entropy(q)
    if -1e-9 <= value < 0:
        return 0.0
    return value


def energy_correction_coefficient(n_t):
    """``2 mu^2 / (1 - mu^2)`` with purity ``mu = 1/(2 n_t + 1)``.

    Accepts ``fractions.Fraction`` for exact arithmetic; simplifies to
    ``1 / (2 n_t (n_t + 1))``.
    """
    purity = 1 / (2 * n_t + 1)
    return 2 * purity**2 / (1 - purity**2)


def ng_second_order(p, dp, n_nu):
    """Second-order non-Gaussianity of the eigenvalue perturbation ``p + dp``.

    ``sum_k dp_k^2 / (2 p_k) - dn^2 / (2 n (1 + n))`` with ``dn = sum_k k dp_k``.
    """
    dp = np.asarray(dp, dtype=float)
    dn = float(np.arange(len(dp)) @ dp)
    return classical_fisher_half(p, dp) - dn**2 / (2.0 * n_nu * (1.0 + n_nu))


@dataclass(frozen=True)
class SecondOrderTerms:
    """Second-order non-Gaussianity of a step ``eps`` towards a target."""

    value: float
    fisher_term: float
    energy_term: float
    delta_n: float

    def __float__(self):
        return self.value


def ng_second_order_target(p, mu, eps, n_t):
    """Second-order non-Gaussianity of ``(1 - eps) p + eps mu``.

    Same quadratic form as :func:`ng_second_order` with ``dp = eps (mu - p)``;
    ``delta_n = sum_k (p_k - mu_k) k``.
    """
    p, mu = as_probs(p), as_probs(mu)
    diff = p - mu
    delta_n = float(np.arange(len(p)) @ diff)
    fisher = eps**2 * classical_fisher_half(p, diff)
    energy = eps**2 * delta_n**2 / (2.0 * n_t * (1.0 + n_t))
    return SecondOrderTerms(fisher - energy, fisher, energy, delta_n)


def concavity_bound(n_t, mu, eps):
    """Upper bound on the non-Gaussianity of ``(1 - eps) thermal(n_t) + eps mu``.

    Follows from concavity of the Shannon entropy; ``mu`` must have the
    mean it is meant to have on the box.
    """
    h_t = h_function(n_t + 0.5)
    n_eta = (1.0 - eps) * n_t + eps * mean_quanta(mu)
    return h_function(n_eta + 0.5) - h_t + eps * (h_t - shannon_entropy(mu))


@dataclass(frozen=True, eq=False)
class PerturbationFamily:
    """Eigenvalue perturbation of ``thermal(n_t)`` along ``direction``.

    ``direction`` is either a zero-sum vector ``dp`` (perturbed distribution
    ``p + eps dp``) or a :class:`TargetSpec` (perturbed distribution
    ``(1 - eps) p + eps mu``).
    """

    n_t: float
    direction: object
    epsilon: float
    dim: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not isinstance(self.direction, TargetSpec):
            dp = np.asarray(self.direction, dtype=float)
            if abs(dp.sum()) > 1e-12:
                raise BadSpec(f"direction sums to {dp.sum():.3e}, not 0")
        if np.any(self.perturbed_probs() < 0):
            raise BadSpec(f"negative probabilities at epsilon={self.epsilon}")

    def base(self):
        return thermal_probs(self.n_t, self._dim())

    def _dim(self):
        if self.dim is not None:
            return self.dim
        if not isinstance(self.direction, TargetSpec):
            return len(self.direction)
        dim = max(fock.DEFAULT_DIM, thermal_min_dim(self.n_t))
        if self.direction.kind in ("poisson", "thermal", "fock"):
            dim = max(dim, required_dim(self.direction.kind, self.direction.n_mu))
        return dim

    def tangent(self):
        """``dp`` per unit epsilon."""
        if isinstance(self.direction, TargetSpec):
            p = self.base()
            return as_probs(target_distribution(self.direction, len(p))) - p
        return np.asarray(self.direction, dtype=float)

    def perturbed_probs(self):
        return self.base() + self.epsilon * self.tangent()

    def distribution(self):
        probs = self.perturbed_probs()
        return NumberDistribution(probs / probs.sum())

    def ng_exact(self):
        return ng_exact_diagonal(self.distribution())

    def ng_second_order(self):
        return ng_second_order(self.base(), self.epsilon * self.tangent(), self.n_t)


def coherence_perturbation(tau, j, k, c, eps):
    """``tau + eps (c |j><k| + c^* |k><j|)``.

    With ``|j - k| >= 3`` the perturbation has no component on
    ``a``, ``a^2`` or ``a^dagger a``, so the covariance matrix and means are
    those of ``tau``.

    Raises:
        BadSpec: if ``|j - k| < 3``.
        NegativityViolation: if ``eps`` exceeds the positivity radius.
    """
    if abs(j - k) < MIN_COHERENCE_GAP:
        raise BadSpec(f"|j - k| = {abs(j - k)} would shift the covariance matrix; need >= 3")
    data = np.array(tau.data)
    data[j, k] += eps * c
    data[k, j] += eps * np.conj(c)
    return make_density(data)


def coherence_direction(dim, j, k, c):
    """Tangent ``c |j><k| + c^* |k><j|`` as a matrix."""
    out = np.zeros((dim, dim), dtype=complex)
    out[j, k] = c
    out[k, j] = np.conj(c)
    return out
