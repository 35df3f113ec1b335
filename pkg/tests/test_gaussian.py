import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ng_geometry import fock, gaussian, metric
from ng_geometry.errors import DomainError, TruncationLeak, UncertaintyViolation
from ng_geometry.gaussian import CovarianceData, GaussianParams

R = 0.3


def test_thermal_examples():
    np.testing.assert_array_equal(gaussian.thermal_probs(0.0, 10)[:2], [1.0, 0.0])
    p = gaussian.thermal_probs(1.0)
    assert p[0] == pytest.approx(0.5, abs=1e-15)
    assert p[1] == pytest.approx(0.25, abs=1e-15)
    assert 0.8**200 / 5 < 1e-19
    gaussian.thermal_probs(4.0, 200)


def test_thermal_tail_guard():
    with pytest.raises(TruncationLeak, match="need dim >= 265"):
        gaussian.thermal_probs(10.0, 200)
    assert gaussian.thermal_min_dim(4.0) == 117
    assert gaussian.thermal_min_dim(10.0) == 265


@pytest.mark.parametrize(
    "x, expected",
    [(0.5, 0.0), (1.5, 2 * math.log(2)), (4.5, 5 * math.log(5) - 4 * math.log(4))],
)
def test_h_function(x, expected):
    assert gaussian.h_function(x) == pytest.approx(expected, abs=1e-14)


def test_h_function_domain():
    with pytest.raises(DomainError):
        gaussian.h_function(0.4)


@pytest.mark.parametrize("n_bar", [0.5, 1.0, 4.0, 10.0])
def test_thermal_entropy_equals_h(n_bar):
    s = fock.von_neumann_entropy(gaussian.thermal_state(n_bar))
    assert s == pytest.approx(gaussian.h_function(n_bar + 0.5), abs=1e-8)


def test_covariance_examples():
    cov = gaussian.covariance_of(fock.fock_state(0, 20))
    np.testing.assert_allclose(cov.sigma, 0.5 * np.eye(2), atol=1e-15)
    np.testing.assert_allclose(cov.mean, 0, atol=1e-15)
    cov = gaussian.covariance_of(gaussian.thermal_state(4.0))
    np.testing.assert_allclose(cov.sigma, 4.5 * np.eye(2), atol=1e-10)
    cov = gaussian.covariance_of(fock.fock_state(1, 20))
    np.testing.assert_allclose(cov.sigma, 1.5 * np.eye(2), atol=1e-15)


def test_covariance_matches_operator_moments(rng):
    # interior state, so q @ q is exact where rho lives
    from conftest import random_mixed_state

    rho = fock.make_density(random_mixed_state(rng, 20))
    ops = fock.mode_operators(20)
    ex = lambda op: np.trace(rho.data @ op).real
    mq, mp = ex(ops.q), ex(ops.p)
    qp = 0.5 * ex(ops.q @ ops.p + ops.p @ ops.q) - mq * mp
    expected = [[ex(ops.q @ ops.q) - mq**2, qp], [qp, ex(ops.p @ ops.p) - mp**2]]
    cov = gaussian.covariance_of(rho)
    np.testing.assert_allclose(cov.sigma, expected, atol=1e-12)
    np.testing.assert_allclose(cov.mean, [mq, mp], atol=1e-12)


def test_covariance_data_guards():
    with pytest.raises(UncertaintyViolation):
        CovarianceData(np.diag([0.1, 0.1]), [0, 0])
    with pytest.raises(ValueError):
        CovarianceData([[1, 0.2], [0.1, 1]], [0, 0])


def test_williamson_examples():
    n_bar, s = gaussian.williamson_1mode(CovarianceData(0.5 * np.eye(2), [0, 0]))
    assert n_bar == pytest.approx(0, abs=1e-15)
    np.testing.assert_allclose(s, np.eye(2), atol=1e-15)
    sigma = np.diag([math.exp(2 * R), math.exp(-2 * R)]) / 2
    n_bar, s = gaussian.williamson_1mode(CovarianceData(sigma, [0, 0]))
    assert n_bar == pytest.approx(0, abs=1e-12)
    np.testing.assert_allclose(s, np.diag([math.exp(R), math.exp(-R)]), atol=1e-12)
    n_bar, s = gaussian.williamson_1mode(CovarianceData(4.5 * np.eye(2), [0, 0]))
    assert n_bar == pytest.approx(4, abs=1e-12)
    np.testing.assert_allclose(s, np.eye(2), atol=1e-12)


@given(
    st.floats(0.5, 20.0),
    st.floats(-1.0, 1.0),
    st.floats(0.0, math.pi),
)
def test_williamson_det_one(nu, log_squeeze, angle):
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    sigma = nu * rot @ np.diag([math.exp(log_squeeze), math.exp(-log_squeeze)]) @ rot.T
    n_bar, s = gaussian.williamson_1mode(CovarianceData(sigma, [0, 0]))
    assert abs(np.linalg.det(s) - 1) <= 1e-10
    np.testing.assert_allclose((n_bar + 0.5) * s @ s.T, sigma, rtol=1e-9, atol=1e-12)


def test_symplectic_unitary_examples():
    np.testing.assert_array_equal(gaussian.symplectic_unitary(GaussianParams(), 20), np.eye(20))
    coherent = gaussian.gaussian_state(GaussianParams(alpha=1.0))
    assert fock.mean_photon_number(coherent) == pytest.approx(1.0, abs=1e-8)
    squeezed = gaussian.gaussian_state(GaussianParams(xi=R))
    cov = gaussian.covariance_of(squeezed)
    np.testing.assert_allclose(cov.sigma, np.diag([math.exp(-2 * R), math.exp(2 * R)]) / 2, atol=1e-10)


def test_squeezing_phase_rotates_axis():
    # xi = r e^{i theta} squeezes the quadrature at angle theta/2
    cov = gaussian.covariance_of(gaussian.gaussian_state(GaussianParams(xi=1j * R)))
    w, v = np.linalg.eigh(cov.sigma)
    assert w[0] == pytest.approx(math.exp(-2 * R) / 2, abs=1e-10)
    assert abs(abs(v[0, 0]) - math.cos(math.pi / 4)) < 1e-8


def test_params_guards():
    with pytest.raises(ValueError):
        GaussianParams(n_bar=-1)
    with pytest.raises(ValueError):
        GaussianParams(xi=1.5)


def test_displaced_state_leaking_out_of_box_fires_guard():
    # exp of the truncated generator is exactly unitary; the leak shows up as
    # mass in the top of the box
    with pytest.raises(TruncationLeak):
        gaussian.gaussian_state(GaussianParams(alpha=5.0), 30)


def _symplectic(xi):
    r, theta = abs(xi), np.angle(xi)
    c, s = math.cos(theta), math.sin(theta)
    return math.cosh(r) * np.eye(2) - math.sinh(r) * np.array([[c, s], [s, -c]])


@pytest.mark.parametrize("params", [GaussianParams(alpha=0.7 - 0.4j), GaussianParams(xi=0.25 + 0.1j)])
def test_covariance_transforms_symplectically(params):
    from conftest import random_mixed_state

    rng = np.random.default_rng(7)
    data = np.zeros((120, 120), dtype=complex)
    data[:20, :20] = random_mixed_state(rng, 40)[:20, :20]
    rho = fock.make_density(data / np.trace(data).real)
    before = gaussian.covariance_of(rho)
    after = gaussian.covariance_of(rho.conjugate_by(gaussian.symplectic_unitary(params, 120)))
    s = _symplectic(params.xi)
    shift = math.sqrt(2) * np.array([params.alpha.real, params.alpha.imag])
    np.testing.assert_allclose(after.sigma, s @ before.sigma @ s.T, atol=1e-6)
    np.testing.assert_allclose(after.mean, s @ before.mean + shift, atol=1e-6)


def test_reference_gaussian_examples():
    thermal = gaussian.thermal_state(4.0)
    assert metric.fidelity(gaussian.reference_gaussian(thermal), thermal) == pytest.approx(1, abs=1e-9)
    ref = gaussian.reference_gaussian(fock.fock_state(1, 200))
    np.testing.assert_allclose(ref.diagonal, gaussian.thermal_probs(1.0, 200), atol=1e-12)
    mix = np.zeros(200)
    mix[:2] = 0.5
    ref = gaussian.reference_gaussian(fock.diagonal_state(mix))
    np.testing.assert_allclose(ref.diagonal, gaussian.thermal_probs(0.5, 200), atol=1e-12)


@given(
    st.floats(0.0, 2.0),
    st.floats(0.0, 0.5),
    st.floats(0.0, 2 * math.pi),
    st.floats(0.0, 1.0),
    st.floats(0.0, 2 * math.pi),
)
def test_reference_gaussian_round_trip(n_bar, r, phase, amp, arg):
    params = GaussianParams(n_bar, r * complex(math.cos(phase), math.sin(phase)),
                            amp * complex(math.cos(arg), math.sin(arg)))
    rho = gaussian.gaussian_state(params)
    ref = gaussian.reference_gaussian(rho)
    assert metric.fidelity(rho, ref) >= 1 - 1e-6
