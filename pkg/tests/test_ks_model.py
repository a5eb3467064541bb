import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from contextlab.ks_model import (
    Z_HAT,
    HiddenVar,
    analytic_expectation,
    density,
    density_integral,
    frame_from_pole,
    ks_subensemble_means,
    mz_channel_transition,
    mz_channel_transitions,
    port_direction,
    quadrature_expectation,
    response,
    response_values,
    sample,
)
from contextlab.qubit import (
    IDENTITY_OBS,
    SIGMA_X,
    SIGMA_Z,
    BlochVector,
    Observable,
    bloch_to_state,
    eigenvalues,
    expectation,
    spin_theta_observable,
)
from contextlab.interferometer import closed_form_means


def random_unit(rng) -> BlochVector:
    v = rng.normal(size=3)
    return BlochVector.from_array(v / np.linalg.norm(v))


@st.composite
def unit_vectors(draw):
    return BlochVector.from_angles(draw(st.floats(0, math.pi)), draw(st.floats(0, 2 * math.pi)))


# ---- oracles: adaptive 1-D/2-D integration in spherical coordinates around z ----

def oracle_sphere_integral(f) -> float:
    """Integral of f(n) over the sphere, with n in the fixed lab frame."""
    val, _ = integrate.dblquad(
        lambda polar, az: f(np.array([math.sin(polar) * math.cos(az), math.sin(polar) * math.sin(az), math.cos(polar)]))
        * math.sin(polar),
        0, 2 * math.pi, 0, math.pi, epsabs=1e-11, epsrel=1e-11,
    )
    return val


def ring_oracle(A: Observable, n: BlochVector) -> float:
    """int rho_n(lambda) A(lambda) dlambda, reduced to one adaptive integral over mu.

    With n as the pole and the observable axis at angle alpha from it, the ring
    at height mu has sgn >= 0 on an azimuth arc of half-width arccos(-k),
    k = mu cot(alpha) / sqrt(1 - mu^2).
    """
    r = A.magnitude
    if r == 0:
        return A.a0
    cos_a = float(np.clip(A.vector @ n.array / r, -1, 1))
    sin_a = math.sqrt(1 - cos_a * cos_a)

    def ring_mean(mu):
        s = math.sqrt(max(1 - mu * mu, 0.0))
        if sin_a == 0 or s == 0:
            return 1.0 if mu * cos_a >= 0 else -1.0
        k = float(np.clip(mu * cos_a / (s * sin_a), -1, 1))
        frac = math.acos(-k) / math.pi
        return 2 * frac - 1

    val, _ = integrate.quad(lambda mu: 2 * mu * ring_mean(mu), 0, 1, points=[sin_a], epsabs=1e-13)
    return A.a0 + r * val


def test_oracle_density_normalizes():
    val = oracle_sphere_integral(lambda n: density(Z_HAT, BlochVector.from_array(n)))
    assert val == pytest.approx(1.0, abs=1e-9)


def test_oracle_mean_projection_is_two_thirds():
    # 2pi * int_0^1 mu * (mu / pi) dmu
    val, _ = integrate.quad(lambda mu: 2 * math.pi * mu * mu / math.pi, 0, 1)
    assert val == pytest.approx(2 / 3, abs=1e-14)


@pytest.mark.parametrize("t", [0.1, 0.3, 0.5, 0.9])
def test_oracle_projection_cdf_is_t_squared(t):
    val, _ = integrate.quad(lambda mu: 2 * math.pi * mu / math.pi, 0, t)
    assert val == pytest.approx(t * t, abs=1e-14)


class TestDensity:
    def test_pole(self):
        assert density(Z_HAT, Z_HAT) == pytest.approx(1 / math.pi)

    def test_antipode(self):
        assert density(Z_HAT, -Z_HAT) == 0.0

    def test_boundary_is_zero(self):
        assert density(Z_HAT, BlochVector(1, 0, 0)) == 0.0

    def test_normalization_random_directions(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            assert density_integral(random_unit(rng), 128) == pytest.approx(1.0, abs=1e-9)

    def test_normalization_agrees_with_oracle_tilted(self):
        n = BlochVector.from_angles(1.1, 0.4)
        ref = oracle_sphere_integral(lambda v: density(n, BlochVector.from_array(v)))
        assert density_integral(n, 64) == pytest.approx(ref, abs=1e-7)

    def test_too_few_nodes(self):
        with pytest.raises(ValueError):
            density_integral(Z_HAT, 32)


class TestFrame:
    @given(unit_vectors())
    def test_rotation_maps_pole(self, n):
        R = frame_from_pole(n.array)
        assert np.allclose(R @ [0, 0, 1], n.array, atol=1e-12)
        assert np.allclose(R.T @ R, np.eye(3), atol=1e-12)
        assert np.linalg.det(R) == pytest.approx(1.0)

    def test_identity_at_north_pole(self):
        assert np.array_equal(frame_from_pole(np.array([0.0, 0.0, 1.0])), np.eye(3))


class TestSampler:
    def test_support(self):
        n = BlochVector.from_angles(2.0, 1.0)
        ens = sample(n, 10_000, 7)
        assert np.all(ens.vectors @ n.array > 0)
        assert np.allclose(np.linalg.norm(ens.vectors, axis=1), 1.0, atol=1e-12)

    def test_members_are_hidden_vars(self):
        ens = sample(Z_HAT, 5, 1)
        assert len(ens) == 5
        assert all(isinstance(m, HiddenVar) for m in ens.members)
        assert ens.seed_record == 1

    def test_zero_count(self):
        with pytest.raises(ValueError):
            sample(Z_HAT, 0, 1)

    def test_deterministic(self):
        a = sample(BlochVector(1, 0, 0), 1000, 42).vectors
        b = sample(BlochVector(1, 0, 0), 1000, 42).vectors
        assert np.array_equal(a, b)

    @pytest.mark.slow
    def test_median_polar_angle(self):
        count = 10**6
        ens = sample(Z_HAT, count, 11)
        polar = np.arccos(np.clip(ens.vectors[:, 2], -1, 1))
        # median standard error: 1 / (2 f(m) sqrt(N)), f(polar) = sin(2 polar) = 1 at pi/4
        se = 1 / (2 * 1.0 * math.sqrt(count))
        assert abs(np.median(polar) - math.pi / 4) < 3 * se

    @pytest.mark.slow
    def test_mean_projection(self):
        count = 10**6
        n = BlochVector.from_angles(0.8, -2.0)
        c = sample(n, count, 12).vectors @ n.array
        # var(mu) = E[mu^2] - 4/9 = 1/2 - 4/9
        se = math.sqrt((0.5 - 4 / 9) / count)
        assert abs(c.mean() - 2 / 3) < 4 * se

    @pytest.mark.slow
    def test_projection_cdf(self):
        n = BlochVector.from_angles(2.5, 0.3)
        c = np.sort(sample(n, 10**6, 13).vectors @ n.array)
        ecdf = np.arange(1, len(c) + 1) / len(c)
        assert np.max(np.abs(ecdf - c**2)) < 0.002


class TestResponse:
    def test_sigma_z_upper(self):
        assert response(SIGMA_Z, HiddenVar(BlochVector.from_angles(0.3, 1.0))) == 1.0

    def test_identity(self):
        assert response(IDENTITY_OBS, HiddenVar(BlochVector(0, 1, 0))) == 1.0

    def test_sigma_theta_pi8_at_z(self):
        assert response(spin_theta_observable(math.pi / 8), HiddenVar(Z_HAT)) == 1.0

    def test_tie_is_plus(self):
        assert response(SIGMA_Z, HiddenVar(BlochVector(1, 0, 0))) == 1.0

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(0)
        A = Observable(0.4, (1.0, -2.0, 0.5))
        v = np.array([random_unit(rng).array for _ in range(200)])
        scalar = [response(A, HiddenVar(BlochVector.from_array(x))) for x in v]
        assert np.array_equal(response_values(A, v), scalar)

    @settings(max_examples=200)
    @given(
        st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), unit_vectors()
    )
    def test_value_definite(self, a0, ax, ay, az, n):
        A = Observable(a0, (ax, ay, az))
        assert response(A, HiddenVar(n)) in eigenvalues(A)


class TestExpectations:
    def test_examples(self):
        assert analytic_expectation(SIGMA_Z, Z_HAT) == 1.0
        assert analytic_expectation(SIGMA_X, Z_HAT) == 0.0

    @pytest.mark.parametrize("vt, th", [(0.3, 0.1), (math.pi / 3, math.pi / 6)])
    def test_tilted(self, vt, th):
        got = analytic_expectation(spin_theta_observable(th), port_direction(vt, 4))
        assert got == pytest.approx(math.cos(2 * (vt - th)), abs=1e-12)

    @settings(max_examples=200)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), unit_vectors())
    def test_analytic_equals_quantum(self, a0, ax, ay, az, n):
        A = Observable(a0, (ax, ay, az))
        assert analytic_expectation(A, n) == pytest.approx(expectation(A, bloch_to_state(n)), abs=1e-12)

    def test_quadrature_identity(self):
        assert quadrature_expectation(IDENTITY_OBS, BlochVector.from_angles(1.0, 2.0), 64) == pytest.approx(1.0, abs=1e-9)

    def test_quadrature_sigma_z(self):
        assert quadrature_expectation(SIGMA_Z, Z_HAT, 64) == pytest.approx(1.0, abs=1e-9)

    def test_quadrature_sigma_x_symmetry(self):
        assert abs(quadrature_expectation(SIGMA_X, Z_HAT, 64)) < 1e-6

    def test_quadrature_against_ring_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            A = Observable(rng.normal(), rng.normal(size=3))
            n = random_unit(rng)
            ref = ring_oracle(A, n)
            assert ref == pytest.approx(analytic_expectation(A, n), abs=1e-9)
            assert quadrature_expectation(A, n, 1024) == pytest.approx(ref, abs=2 * A.magnitude / 1024)

    def test_quadrature_error_shrinks(self):
        rng = np.random.default_rng(9)
        cases = [(Observable(0, tuple(random_unit(rng).array)), random_unit(rng)) for _ in range(12)]
        worst = []
        for nodes in (64, 256, 1024):
            errs = [abs(quadrature_expectation(A, n, nodes) - analytic_expectation(A, n)) for A, n in cases]
            # sgn jumps cross cells: error bounded by 2|a|/n
            assert max(errs) <= 2.0 / nodes
            worst.append(max(errs))
        assert worst[0] > worst[1] > worst[2]

    def test_quadrature_too_few_nodes(self):
        with pytest.raises(ValueError):
            quadrature_expectation(SIGMA_Z, Z_HAT, 10)


class TestChannel:
    def test_single_transition(self):
        out = mz_channel_transition(0.4, 5)
        assert out.port in (3, 4)
        assert out.post_var.n_lambda.array @ port_direction(0.4, out.port).array > 0

    def test_port_fraction(self):
        ports, _ = mz_channel_transitions(0.7, 10**6, 21)
        assert abs(np.mean(ports == 3) - 0.5) < 4 * 0.0005

    def test_support_per_port(self):
        vt = 1.3
        ports, post = mz_channel_transitions(vt, 100_000, 22)
        for port in (3, 4):
            assert np.all(post[ports == port] @ port_direction(vt, port).array > 0)

    def test_vartheta_zero_port4_matches_sampler(self):
        ports, post = mz_channel_transitions(0.0, 5000, 23)
        members = sample(Z_HAT, 5000, 23).vectors
        mask = ports == 4
        assert np.array_equal(post[mask], members[mask])

    def test_port_directions(self):
        vt = 0.35
        up = np.array([math.sin(2 * vt), 0, math.cos(2 * vt)])
        assert np.allclose(port_direction(vt, 4).array, up)
        assert np.allclose(port_direction(vt, 3).array, -up)
        with pytest.raises(ValueError):
            port_direction(vt, 1)


class TestMonteCarlo:
    def test_count_validation(self):
        with pytest.raises(ValueError):
            ks_subensemble_means(0.1, 0.2, 99, 1)

    def test_deterministic(self):
        a = ks_subensemble_means(0.5, 0.1, 50_000, 4)
        b = ks_subensemble_means(0.5, 0.1, 50_000, 4)
        assert a == b

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "vt, th",
        [(0.6, 0.6), (math.pi / 4 + 0.1, 0.1), (math.pi / 3, math.pi / 6)],
    )
    def test_reproduces_closed_form(self, vt, th):
        est = ks_subensemble_means(vt, th, 10**6, 31)
        ref = closed_form_means(vt, th)
        assert abs(est.sg1_est - ref.sg1) < 4 * est.sg1_se
        assert abs(est.sg2_est - ref.sg2) < 4 * est.sg2_se

    def test_aligned_port4_standard_error(self):
        # response is identically +1 at port 4 when theta == vartheta; x is a port indicator
        est = ks_subensemble_means(0.6, 0.6, 40_000, 8)
        p = est.sg2_est
        assert est.sg2_se == pytest.approx(math.sqrt(p * (1 - p) / 40_000), rel=1e-9)
