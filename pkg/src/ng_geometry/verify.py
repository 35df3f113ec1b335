"""Verification harnesses, target-mixing sweeps and the maximal-nG search.

Randomness: instance ``i`` of a harness seeded with ``seed`` draws from
``numpy.random.default_rng([seed, i])``, so reports do not depend on the
order in which instances run or on ``jobs``.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import entr

from .errors import BadSpec, InfeasibleConstraint, NegativityViolation
from .fock import DEFAULT_DIM, NumberDistribution, diagonal_state
from .gaussian import h_function, thermal_min_dim, thermal_probs, thermal_state
from .metric import qfi_distance
from .nongauss import relative_entropy
from .perturb import (
    TargetSpec,
    coherence_direction,
    coherence_perturbation,
    concavity_bound,
    convex_combination,
    energy_constrained_random,
    energy_correction_coefficient,
    ng_exact_diagonal,
    ng_second_order,
    ng_second_order_target,
    random_simplex,
    required_dim,
    target_distribution,
)

logger = logging.getLogger(__name__)

DIRECTION_LEVELS = 50
THEOREM1_TOL = 1e-2
SECOND_ORDER_TOL = 5e-3
THEOREM2_TOL = 1e-10
TIE_TOL = 1e-9
FOCK_TV_TOL = 1e-3
PANELS = ("poisson", "thermal", "fock", "epsilon")


@dataclass
class VerificationReport:
    """Per-instance residuals (equality checks) or slacks (inequality checks).

    For equality checks ``passed`` means ``max |residual| <= tolerance``; for
    inequality checks it means ``min slack >= -tolerance``. ``details`` holds
    the per-instance ingredients as arrays of the same length.
    """

    name: str
    kind: str
    residuals: np.ndarray
    tolerance: float
    seed: int
    config: dict
    details: dict = field(default_factory=dict)
    resampled: int = 0

    @property
    def instances(self):
        return len(self.residuals)

    @property
    def max_abs_residual(self):
        return float(np.max(np.abs(self.residuals))) if self.instances else 0.0

    @property
    def min_slack(self):
        return float(np.min(self.residuals)) if self.instances else 0.0

    @property
    def statistic(self):
        return self.max_abs_residual if self.kind == "equality" else self.min_slack

    @property
    def passed(self):
        if self.kind == "equality":
            return self.max_abs_residual <= self.tolerance
        return self.min_slack >= -self.tolerance

    def summary(self):
        label = "max|residual|" if self.kind == "equality" else "min slack"
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{self.name}: {status} instances={self.instances} "
            f"{label}={self.statistic:.3e} tol={self.tolerance:.1e} "
            f"resampled={self.resampled} seed={self.seed}"
        )


def instance_rng(seed, index):
    return np.random.default_rng([seed, index])


def _map(func, count, jobs):
    if jobs is None or jobs <= 1:
        return [func(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, range(count)))


def random_direction(p, rng, fix_energy=False, levels=DIRECTION_LEVELS):
    """Random zero-sum eigenvalue perturbation of ``p`` per unit scale.

    ``dp_k = p_k g_k`` on the first ``levels`` Fock levels with standard
    normal ``g``, projected in the ``p``-weighted inner product so that
    ``sum dp = 0`` (and ``sum k dp = 0`` when ``fix_energy``). Relative
    changes ``dp_k / p_k`` are O(1), so ``p + scale dp`` stays positive for
    small ``scale`` even where ``p_k`` is tiny.
    """
    levels = min(levels, len(p))
    w = np.asarray(p[:levels], dtype=float)
    g = rng.standard_normal(levels)
    k = np.arange(levels, dtype=float)
    basis = np.stack([np.ones(levels), k], axis=1) if fix_energy else np.ones((levels, 1))
    coef = np.linalg.solve(basis.T @ (w[:, None] * basis), basis.T @ (w * g))
    g = g - basis @ coef
    dp = np.zeros(len(p))
    dp[:levels] = w * g
    return dp


def verify_second_order(n_t=4.0, count=100, scale=1e-3, seed=42, dim=None, jobs=1):
    """Relative error of the second-order non-Gaussianity on random directions."""
    p = thermal_probs(n_t, dim)

    def one(i):
        dp = scale * random_direction(p, instance_rng(seed, i))
        exact = ng_exact_diagonal(p + dp)
        approx = ng_second_order(p, dp, n_t)
        return exact, approx

    exact, approx = map(np.array, zip(*_map(one, count, jobs)))
    absolute = approx - exact
    relative = np.divide(np.abs(absolute), exact, out=np.zeros(count), where=exact > 0)
    return VerificationReport(
        name="second-order expansion",
        kind="equality",
        residuals=relative,
        tolerance=SECOND_ORDER_TOL,
        seed=seed,
        config={"n_t": n_t, "count": count, "scale": scale, "dim": len(p)},
        details={"delta_exact": exact, "delta_2nd": approx, "abs_residual": absolute},
    )


def verify_theorem1(n_t=4.0, count=100, scale=1e-3, seed=42, fix_energy=False, dim=None, jobs=1):
    """QFI distance = nG + energy correction for eigenvalue perturbations.

    Residuals are ``|D_Q - delta - c dn^2| / D_Q`` with
    ``c = 2 mu^2 / (1 - mu^2)``, ``mu = 1/(2 n_t + 1)``.
    """
    if n_t <= 0:
        raise BadSpec("n_t must be positive: the vacuum has no eigenvalue perturbations")
    tau = thermal_state(n_t, dim)
    p = tau.diagonal
    coef = energy_correction_coefficient(n_t)
    k = np.arange(len(p))

    def one(i):
        dp = scale * random_direction(p, instance_rng(seed, i), fix_energy)
        delta = ng_exact_diagonal(p + dp)
        d_q = qfi_distance(tau, np.diag(dp))
        dn = float(k @ dp)
        return d_q, delta, dn

    d_q, delta, dn = map(np.array, zip(*_map(one, count, jobs)))
    absolute = d_q - delta - coef * dn**2
    relative = np.divide(np.abs(absolute), d_q, out=np.zeros(count), where=d_q > 0)
    return VerificationReport(
        name="theorem 1",
        kind="equality",
        residuals=relative,
        tolerance=THEOREM1_TOL,
        seed=seed,
        config={
            "n_t": n_t,
            "count": count,
            "scale": scale,
            "fix_energy": fix_energy,
            "dim": len(p),
            "correction_coefficient": coef,
        },
        details={"d_q": d_q, "delta": delta, "dn": dn, "abs_residual": absolute},
    )


def _coherence_instance(tau, seed, index, scale, levels):
    """Draw ``(j, k, c)`` until the perturbation is positive; count rejections."""
    rng = instance_rng(seed, index)
    rejected = 0
    while True:
        j, k = (int(x) for x in rng.integers(0, levels, size=2))
        if abs(j - k) < 3:
            continue
        c = complex(np.exp(2j * np.pi * rng.random()))
        try:
            rho = coherence_perturbation(tau, j, k, c, scale)
        except NegativityViolation:
            rejected += 1
            continue
        return rho, coherence_direction(tau.dim, j, k, c), rejected


def verify_theorem2(n_t=4.0, count=100, scale=1e-3, seed=42, classical=False, dim=None, jobs=1):
    """nG upper-bounds the QFI distance for fixed-covariance perturbations.

    Slack is ``delta - D_Q`` with ``delta`` the relative entropy to the
    unperturbed thermal state, which shares the covariance matrix. With
    ``classical=True`` the perturbations are energy-preserving eigenvalue
    perturbations instead, the equality case; the report then checks
    ``|slack| <= 1e-10``.
    """
    tau = thermal_state(n_t, dim)
    p = tau.diagonal
    levels = min(DIRECTION_LEVELS, tau.dim)

    def one(i):
        if classical:
            dp = scale * random_direction(p, instance_rng(seed, i), fix_energy=True)
            rho, drho, rejected = diagonal_state(p + dp), np.diag(dp), 0
            d_q = qfi_distance(tau, drho)
        else:
            rho, drho, rejected = _coherence_instance(tau, seed, i, scale, levels)
            d_q = qfi_distance(tau, drho, scale)
        delta = relative_entropy(rho, tau)
        return delta, d_q, rejected

    delta, d_q, rejected = map(np.array, zip(*_map(one, count, jobs)))
    return VerificationReport(
        name="theorem 2 (classical)" if classical else "theorem 2",
        kind="equality" if classical else "inequality",
        residuals=delta - d_q,
        tolerance=THEOREM2_TOL,
        seed=seed,
        config={"n_t": n_t, "count": count, "scale": scale, "classical": classical, "dim": tau.dim},
        details={"delta": delta, "d_q": d_q},
        resampled=int(rejected.sum()),
    )


SWEEP_COLUMNS = ("panel", "n_t", "eps", "n_mu", "delta_exact", "delta_2nd", "bound")


@dataclass
class SweepTable:
    """Rows of ``(panel, n_t, eps, n_mu, delta_exact, delta_2nd, bound)``."""

    rows: list = field(default_factory=list)
    columns: tuple = SWEEP_COLUMNS

    def column(self, name):
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows])

    def select(self, **match):
        idx = {name: self.columns.index(name) for name in match}
        rows = [r for r in self.rows if all(r[idx[n]] == v for n, v in match.items())]
        return SweepTable(rows, self.columns)


def _second_order_diverges(kind, n_t, n_mu):
    # sum mu_k^2 / p_k for a thermal target is a geometric series with ratio
    # x_mu^2 / x_t, x = n / (1 + n); it diverges once the ratio reaches 1
    if kind != "thermal":
        return False
    x_t = n_t / (1.0 + n_t)
    x_mu = n_mu / (1.0 + n_mu)
    return x_mu**2 >= x_t


def _sweep_rows(panel_id, kind, n_t, eps_list, n_mu_grid, dim):
    p = thermal_probs(n_t, dim)
    rows = []
    for n_mu in n_mu_grid:
        mu = target_distribution(TargetSpec(kind, n_mu=n_mu), dim)
        diverges = _second_order_diverges(kind, n_t, n_mu)
        for eps in eps_list:
            q = convex_combination(p, mu, eps)
            exact = ng_exact_diagonal(q)
            second = math.inf if diverges else ng_second_order_target(p, mu, eps, n_t).value
            bound = concavity_bound(n_t, mu, eps)
            rows.append((panel_id, float(n_t), float(eps), float(n_mu), exact, second, bound))
    return rows


def _panel_jobs(panel):
    if panel == "epsilon":
        return [("epsilon-poisson", "poisson"), ("epsilon-fock", "fock")]
    return [(panel, panel)]


def fig1_dim(panel, n_t, n_mu_grid):
    """Smallest default-or-larger box that fits the base and every target."""
    grid = [float(n_t)] if panel == "epsilon" else [float(n) for n in n_mu_grid]
    dim = max(DEFAULT_DIM, thermal_min_dim(n_t))
    for _, kind in _panel_jobs(panel):
        dim = max(dim, *(required_dim(kind, n) for n in grid))
    return dim


def sweep_fig1(panel, n_t=4.0, eps_list=(0.3, 0.7, 0.9), n_mu_grid=range(21), dim=None):
    """Non-Gaussianity of ``(1 - eps) thermal(n_t) + eps target``.

    Panels ``poisson``, ``thermal`` and ``fock`` sweep the target mean over
    ``n_mu_grid`` for each ``eps``. Panel ``epsilon`` sweeps ``eps_list`` at
    ``n_mu = n_t`` for Poissonian and Fock targets (panel ids
    ``epsilon-poisson`` and ``epsilon-fock``). The second-order column is
    ``inf`` where the expansion's chi-square sum diverges (thermal targets
    much hotter than the base).
    """
    if panel not in PANELS:
        raise BadSpec(f"unknown panel {panel!r}; expected one of {PANELS}")
    eps_list = [float(e) for e in eps_list]
    n_mu_grid = [float(n) for n in n_mu_grid]
    if not eps_list or not n_mu_grid:
        raise BadSpec("sweep grids must be nonempty")
    jobs = _panel_jobs(panel)
    grid = [float(n_t)] if panel == "epsilon" else n_mu_grid
    if any(kind == "fock" for _, kind in jobs) and any(n != int(n) for n in grid):
        raise BadSpec("Fock target requires integer n_mu")
    if dim is None:
        dim = fig1_dim(panel, n_t, grid)
    table = SweepTable()
    for panel_id, kind in jobs:
        table.rows.extend(_sweep_rows(panel_id, kind, n_t, eps_list, grid, dim))
    return table


# ---------------------------------------------------------------------------
# maximal non-Gaussianity search


class _FeasibleSet:
    """``{mu >= 0, sum mu = 1, sum k mu = n_mu}`` on ``support`` points."""

    def __init__(self, support, n_mu):
        self.k = np.arange(support, dtype=float)
        self.constraints = np.stack([np.ones(support), self.k])
        self.rhs = np.array([1.0, n_mu])
        self.gram_inv = np.linalg.inv(self.constraints @ self.constraints.T)

    def affine(self, z):
        c = self.constraints
        return z - c.T @ (self.gram_inv @ (c @ z - self.rhs))

    def project(self, y, max_iter=5000, tol=1e-14):
        """Dykstra's alternating projection onto affine set and orthant."""
        x = np.array(y, dtype=float)
        p = np.zeros_like(x)
        q = np.zeros_like(x)
        for _ in range(max_iter):
            a = self.affine(x + p)
            p = x + p - a
            x_new = np.clip(a + q, 0.0, None)
            q = a + q - x_new
            done = np.max(np.abs(x_new - x)) < tol
            x = x_new
            if done:
                break
        return self.polish(x)

    def polish(self, x, zero_tol=1e-12):
        """Exact affine projection restricted to the positive entries."""
        x = np.where(x > zero_tol, x, 0.0)
        for _ in range(len(x)):
            active = x > 0
            c = self.constraints[:, active]
            gram = c @ c.T
            if np.linalg.matrix_rank(gram) < 2:
                # one-point support: feasible only as a Fock state
                break
            z = x[active]
            x_active = z - c.T @ np.linalg.solve(gram, c @ z - self.rhs)
            if np.all(x_active >= 0):
                x = np.zeros_like(x)
                x[active] = x_active
                break
            x[active] = np.clip(x_active, 0.0, None)
        return x


@dataclass
class SearchResult:
    """Best target found by :func:`search_max_ng`."""

    target: NumberDistribution
    delta: float
    support: tuple
    is_fock: bool
    tv_to_fock: float
    candidates: list
    config: dict


def search_max_ng(
    n_t=4.0,
    eps=0.5,
    n_mu=4.0,
    support=30,
    restarts=20,
    iterations=300,
    seed=42,
    dim=None,
    jobs=1,
):
    """Maximize the nG of ``(1 - eps) thermal(n_t) + eps mu`` at fixed ``<n>_mu``.

    Projected-gradient ascent over the simplex on ``support`` Fock levels,
    restricted to ``sum k mu_k = n_mu``. The objective is convex in ``mu``,
    so every ascent step is monotone and restarts end on vertices of the
    feasible polytope (targets on at most two Fock levels). Restart ``r``
    starts from the projection of a uniform simplex sample drawn with
    ``default_rng([seed, r])``.

    Raises:
        InfeasibleConstraint: if ``n_mu`` is outside ``[0, support - 1]``.
    """
    if support < 2:
        raise BadSpec("support must be at least 2")
    if not 0 <= n_mu <= support - 1:
        raise InfeasibleConstraint(
            f"n_mu={n_mu} is not reachable on {support} Fock levels", module="verify"
        )
    if dim is None:
        dim = max(DEFAULT_DIM, thermal_min_dim(n_t), math.ceil(support * 10 / 9) + 1)
    p = thermal_probs(n_t, dim)
    feasible = _FeasibleSet(support, n_mu)
    base = (1.0 - eps) * p
    base_entropy_tail = float(np.sum(entr(base[support:])))
    n_eta = (1.0 - eps) * float(np.arange(dim) @ p) + eps * n_mu
    h_eta = h_function(n_eta + 0.5)

    def objective(mu):
        q = base[:support] + eps * mu
        return h_eta - float(np.sum(entr(q))) - base_entropy_tail

    def gradient(mu):
        # d/dmu_k of -H[q]; the h term is constant on the feasible set
        q = base[:support] + eps * mu
        return eps * np.log(np.clip(q, 1e-300, None))

    def ascend(r):
        rng = instance_rng(seed, r)
        mu = feasible.project(random_simplex(support, rng))
        value = objective(mu)
        for _ in range(iterations):
            g = gradient(mu)
            g = g - g.mean()
            scale = np.max(np.abs(g))
            if scale == 0:
                break
            nxt = feasible.project(mu + g / scale)
            nxt_value = objective(nxt)
            moved = np.max(np.abs(nxt - mu))
            if nxt_value < value - 1e-15:
                break
            mu, value = nxt, nxt_value
            if moved < 1e-12:
                break
        mu = feasible.polish(mu)
        return objective(mu), tuple(int(i) for i in np.flatnonzero(mu > 0)), mu

    candidates = _map(ascend, restarts, jobs)
    best_value = max(c[0] for c in candidates)
    tied = [c for c in candidates if c[0] >= best_value - TIE_TOL]
    value, supp, mu = min(tied, key=lambda c: c[1])

    target = np.zeros(dim)
    target[:support] = mu
    tv = math.inf
    if float(n_mu).is_integer():
        fock = np.zeros(dim)
        fock[int(n_mu)] = 1.0
        tv = 0.5 * float(np.sum(np.abs(target - fock)))
    logger.info("search best delta=%.12g support=%s", value, supp)
    return SearchResult(
        target=NumberDistribution(target),
        delta=value,
        support=supp,
        is_fock=tv <= FOCK_TV_TOL,
        tv_to_fock=tv,
        candidates=[(c[0], c[1]) for c in candidates],
        config={
            "n_t": n_t,
            "eps": eps,
            "n_mu": n_mu,
            "support": support,
            "restarts": restarts,
            "iterations": iterations,
            "seed": seed,
            "dim": dim,
        },
    )


def random_target_baseline(n_t=4.0, eps=0.5, n_mu=4.0, support=30, count=200, seed=42, dim=None):
    """nG of ``count`` energy-constrained random targets (independent oracle)."""
    if dim is None:
        dim = max(DEFAULT_DIM, thermal_min_dim(n_t))
    p = thermal_probs(n_t, dim)
    values = np.empty(count)
    for i in range(count):
        mu = np.zeros(dim)
        mu[:support] = energy_constrained_random(support, n_mu, instance_rng(seed, i))
        values[i] = ng_exact_diagonal(convex_combination(p, mu, eps))
    return values
