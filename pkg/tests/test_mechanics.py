import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reparam_qm.mechanics import (
    GaugeError,
    GaugeFunction,
    LagrangianModel,
    PhaseState,
    SuperluminalError,
    Trajectory,
    canonical_hamiltonian_ri,
    covariant_relativistic_lagrangian,
    exponential_gauge,
    free_particle,
    harmonic_oscillator,
    identity_gauge,
    integrate_physical,
    invert_velocities,
    legendre_momenta,
    lift_to_ri,
    physical_hamiltonian,
    poisson_bracket,
    power_gauge,
    quadratic_model,
    reconstruct_physical,
    ri_constraint,
    ri_relativistic_lagrangian,
    relativistic_momenta,
    relativistic_particle,
)
from reparam_qm.spectral import PhysicalConstants

UNIT = PhysicalConstants(1.0, 1.0, 1.0)


def quartic_model():
    """``L = v^2/2 + v^4/4 - q^2/2`` with momenta left to finite differences."""
    return LagrangianModel(
        1, lambda q, v, t: 0.5 * v @ v + 0.25 * (v @ v) ** 2 - 0.5 * q @ q, label="quartic"
    )


def planar_model():
    """Two-dimensional anisotropic oscillator with a time-dependent drive."""
    M = np.array([[2.0, 0.3], [0.3, 1.0]])
    return LagrangianModel(
        2,
        lambda q, v, t: 0.5 * v @ M @ v - 0.5 * (q[0] ** 2 + 4 * q[1] ** 2) + np.sin(t) * q[0],
        label="planar",
    )


class TestLegendre:
    def test_quadratic(self):
        assert legendre_momenta(free_particle(), [0.0], [2.0], 0.0)[0] == 2.0

    def test_relativistic(self):
        p = legendre_momenta(relativistic_particle(UNIT), [0.0], [0.6], 0.0)[0]
        assert p == pytest.approx(0.75, abs=1e-14)

    def test_finite_difference_matches_analytic(self):
        analytic = quadratic_model(1.7)
        numeric = LagrangianModel(1, analytic.lagrangian)
        for v in (-3.0, 0.0, 0.4, 11.0):
            a = legendre_momenta(analytic, [0.2], [v], 0.0)
            n = legendre_momenta(numeric, [0.2], [v], 0.0)
            assert abs(a[0] - n[0]) < 1e-9

    def test_nonfinite_lagrangian(self):
        bad = LagrangianModel(1, lambda q, v, t: np.log(v[0]))
        with np.errstate(invalid="ignore"), pytest.raises(ValueError, match="non-finite"):
            legendre_momenta(bad, [0.0], [1e-7], 0.0)


class TestInversion:
    def test_quadratic(self):
        assert invert_velocities(free_particle(), [0.0], [2.0], 0.0)[0] == pytest.approx(2.0, abs=1e-12)

    def test_relativistic(self):
        v = invert_velocities(relativistic_particle(UNIT), [0.0], [0.75], 0.0)[0]
        assert v == pytest.approx(0.6, abs=1e-12)

    def test_relativistic_large_momentum_stays_subluminal(self):
        v = invert_velocities(relativistic_particle(UNIT), [0.0], [50.0], 0.0)[0]
        assert v == pytest.approx(50 / np.sqrt(1 + 2500), abs=1e-12)
        assert v < 1.0

    @pytest.mark.parametrize("model", [quartic_model(), planar_model(), relativistic_particle(PhysicalConstants(1.0, 2.0, 0.5))], ids=lambda m: m.label)
    def test_round_trip(self, model, rng):
        # unit-scale points: finite-difference momenta carry eps |L| / h noise
        for _ in range(20):
            q = rng.uniform(-1, 1, size=model.dim)
            v = rng.uniform(-1.5, 1.5, size=model.dim)
            t = rng.uniform(0, 3)
            p = legendre_momenta(model, q, v, t)
            assert np.max(np.abs(invert_velocities(model, q, p, t) - v)) < 1e-10


class TestHamiltonian:
    def test_free(self):
        assert physical_hamiltonian(free_particle(), [0.0], [2.0], 0.0) == pytest.approx(2.0, abs=1e-12)

    def test_relativistic(self):
        assert physical_hamiltonian(relativistic_particle(UNIT), [0.0], [0.75], 0.0) == pytest.approx(1.25, abs=1e-12)

    def test_constant_potential_shift(self):
        base = physical_hamiltonian(free_particle(), [0.3], [1.1], 0.0)
        shifted = physical_hamiltonian(quadratic_model(1.0, lambda q, t: 5.0), [0.3], [1.1], 0.0)
        assert shifted - base == pytest.approx(5.0, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-5, 5), st.floats(-20, 20), st.floats(0.1, 4))
    def test_legendre_involution(self, q, p, m):
        model = harmonic_oscillator(m, 1.3)
        expected = p**2 / (2 * m) + 0.5 * m * 1.3**2 * q**2
        assert abs(physical_hamiltonian(model, [q], [p], 0.0) - expected) < 1e-10 * max(1.0, expected)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-30, 30), st.floats(0.2, 3), st.floats(0.5, 4))
    def test_relativistic_involution(self, p, m, c):
        model = relativistic_particle(PhysicalConstants(1.0, c, m))
        expected = c * np.sqrt(m**2 * c**2 + p**2)
        assert abs(physical_hamiltonian(model, [0.0], [p], 0.0) - expected) < 1e-10 * max(1.0, expected)


class TestConstraint:
    def test_free_on_shell(self):
        assert ri_constraint(free_particle(), PhaseState([0.0], [2.0], 0.0, -2.0)) == pytest.approx(0.0, abs=1e-12)

    def test_relativistic_rest(self):
        assert ri_constraint(relativistic_particle(UNIT), PhaseState([0.0], [0.0], 0.0, -1.0)) == pytest.approx(0.0, abs=1e-12)

    def test_linear_in_p_t(self):
        assert ri_constraint(free_particle(), PhaseState([0.0], [2.0], 0.0, -1.9)) == pytest.approx(0.1, abs=1e-12)

    def test_phase_state_validation(self):
        with pytest.raises(ValueError, match="non-finite"):
            PhaseState([np.nan], [0.0], 0.0, 0.0)
        with pytest.raises(ValueError, match="dimension"):
            PhaseState([0.0, 1.0], [0.0], 0.0, 0.0)


MODELS = [free_particle(), harmonic_oscillator(1.3, 0.8), relativistic_particle(UNIT), quartic_model(), planar_model()]


class TestCanonicalHamiltonian:
    @pytest.mark.parametrize("model", MODELS, ids=lambda m: m.label)
    def test_factorization_off_shell(self, model, rng):
        for _ in range(20):
            q = rng.normal(size=model.dim)
            tdot = rng.uniform(0.1, 3.0)
            qdot = rng.uniform(-0.9, 0.9, size=model.dim) * tdot
            res = canonical_hamiltonian_ri(model, q, qdot, rng.uniform(0, 2), tdot, p_t=rng.normal(scale=3))
            assert res.factorization_residual < 1e-10

    @pytest.mark.parametrize("model", MODELS, ids=lambda m: m.label)
    def test_vanishes_on_shell(self, model, rng):
        q = rng.normal(size=model.dim)
        res = canonical_hamiltonian_ri(model, q, 0.5 * np.ones(model.dim), 0.4, 1.7)
        assert abs(res.value) < 1e-10
        assert res.factorization_residual < 1e-10

    def test_linear_in_tdot(self):
        model = harmonic_oscillator()
        a = canonical_hamiltonian_ri(model, [0.3], [0.2], 0.0, 1.0, p_t=0.7).value
        b = canonical_hamiltonian_ri(model, [0.3], [0.6], 0.0, 3.0, p_t=0.7).value
        assert b == pytest.approx(3 * a, rel=1e-12)

    @pytest.mark.parametrize("tdot", [0.0, -1.0])
    def test_tdot_positive(self, tdot):
        with pytest.raises(GaugeError):
            canonical_hamiltonian_ri(free_particle(), [0.0], [1.0], 0.0, tdot)


class TestIntegrate:
    def test_free_line(self):
        traj = integrate_physical(free_particle(), [0.5], [2.0], 0.0, 3.0, 0.01)
        assert np.max(np.abs(traj.q[:, 0] - (0.5 + 2 * traj.t))) < 1e-10
        assert traj.meta["gauge"] == "identity"

    def test_harmonic_energy_over_period(self):
        model = harmonic_oscillator()
        traj = integrate_physical(model, [1.0], [0.0], 0.0, 2 * np.pi, 2 * np.pi / 6284)
        energy = 0.5 * traj.p[:, 0] ** 2 + 0.5 * traj.q[:, 0] ** 2
        assert np.max(np.abs(energy - 0.5)) / 0.5 < 1e-10
        assert np.max(np.abs(traj.q[:, 0] - np.cos(traj.t))) < 1e-10
        assert np.max(np.abs(traj.p[:, 0] + np.sin(traj.t))) < 1e-10

    def test_fourth_order(self):
        model = harmonic_oscillator()

        def endpoint_error(dt):
            traj = integrate_physical(model, [1.0], [0.0], 0.0, 2.0, dt)
            return abs(traj.q[-1, 0] - np.cos(2.0))

        ratio = endpoint_error(0.1) / endpoint_error(0.05)
        assert ratio == pytest.approx(16.0, rel=0.1)

    def test_p_t_constant_for_static_potential(self):
        traj = integrate_physical(harmonic_oscillator(), [1.0], [0.3], 0.0, 5.0, 1e-2)
        assert np.ptp(traj.p_t) < 1e-10

    def test_driven_constraint(self):
        model = planar_model()
        traj = integrate_physical(model, [0.3, -0.2], [0.1, 0.4], 0.0, 1.0, 1e-2)
        worst = max(abs(ri_constraint(model, s)) for s in traj.samples[::10])
        assert worst < 1e-8
        assert np.ptp(traj.p_t) > 1e-3  # explicit time dependence moves p_t

    @pytest.mark.parametrize("method", ["envelope", "stencil"])
    def test_relativistic_short_run(self, method):
        model = relativistic_particle(UNIT)
        traj = integrate_physical(model, [0.0], [0.6], 0.0, 0.5, 0.05, method=method)
        np.testing.assert_allclose(traj.q[:, 0], 0.6 * traj.t, atol=1e-10)
        np.testing.assert_allclose(traj.p_t, -1.25, atol=1e-9)

    def test_bad_interval(self):
        with pytest.raises(ValueError, match="multiple"):
            integrate_physical(free_particle(), [0.0], [1.0], 0.0, 1.05, 0.1)

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="method"):
            integrate_physical(free_particle(), [0.0], [1.0], 0.0, 1.0, 0.1, method="euler")


class TestGauges:
    def test_inverse(self):
        g = power_gauge(3, 0.1, 1.0)
        assert g.inverse(0.125) == pytest.approx(0.5, abs=1e-14)
        with pytest.raises(GaugeError, match="outside"):
            g.inverse(2.0)

    def test_lift_identity_is_round_trip(self):
        traj = integrate_physical(free_particle(), [0.0], [1.0], 1.0, 2.0, 0.01)
        lifted = lift_to_ri(traj, identity_gauge(1.0, 2.0))
        np.testing.assert_allclose(lifted.t, traj.t, atol=1e-14)
        np.testing.assert_allclose(lifted.q, traj.q, atol=1e-13)

    def test_cubic_gauge_free_line(self):
        traj = integrate_physical(free_particle(), [0.001], [1.0], 0.001, 1.0, 0.001)
        lifted = lift_to_ri(traj, power_gauge(3, 0.1, 1.0))
        tau = lifted.tau
        assert tau[0] == pytest.approx(0.1, abs=1e-14) and tau[-1] == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(lifted.t, tau**3, atol=1e-14)
        np.testing.assert_allclose(lifted.q[:, 0], tau**3, atol=1e-12)
        x_of_t = reconstruct_physical(lifted)
        t = np.linspace(0.001, 1.0, 333)
        np.testing.assert_allclose(x_of_t(t)[:, 0], t, atol=1e-12)

    def test_lifted_harmonic_constraint(self):
        model = harmonic_oscillator()
        traj = integrate_physical(model, [1.0], [0.0], 0.0, 2.0, 1e-3)
        lifted = lift_to_ri(traj, exponential_gauge(0.0, np.log(3.0)), samples=200)
        assert max(abs(ri_constraint(model, s)) for s in lifted.samples) < 1e-8

    def test_two_gauges_agree(self):
        traj = integrate_physical(harmonic_oscillator(), [1.0], [0.5], 0.001, 2.001, 1e-3)
        a = reconstruct_physical(lift_to_ri(traj, power_gauge(3, 0.1, 2.001 ** (1 / 3))))
        b = reconstruct_physical(lift_to_ri(traj, exponential_gauge(np.log1p(0.001), np.log1p(2.001))))
        t = np.linspace(0.001, 2.001, 777)
        assert np.max(np.abs(a(t) - b(t))) < 1e-7

    def test_gauge_range_mismatch(self):
        traj = integrate_physical(free_particle(), [0.0], [1.0], 0.0, 2.0, 0.1)
        with pytest.raises(GaugeError):
            lift_to_ri(traj, power_gauge(3, 0.0, 1.0))

    def test_decreasing_gauge_rejected(self):
        traj = integrate_physical(free_particle(), [0.0], [1.0], 0.0, 1.0, 0.1)
        wobbly = GaugeFunction(lambda s: s + 0.3 * np.sin(8 * s), lambda s: 1 + 2.4 * np.cos(8 * s), 0.0, 1.2)
        with pytest.raises(GaugeError):
            lift_to_ri(traj, wobbly)

    def test_trajectory_monotonic(self):
        with pytest.raises(GaugeError):
            Trajectory(np.arange(3.0), np.array([0.0, 2.0, 1.0]), np.zeros((3, 1)), np.zeros((3, 1)), np.zeros(3))


class TestBrackets:
    STATE = PhaseState([0.3, -1.2], [0.7, 2.0], 0.4, -1.1)

    @pytest.mark.parametrize(
        "f,g,expected",
        [
            (lambda q, p, t, pt: q[0], lambda q, p, t, pt: p[0], 1.0),
            (lambda q, p, t, pt: t, lambda q, p, t, pt: pt, 1.0),
            (lambda q, p, t, pt: q[0], lambda q, p, t, pt: p[1], 0.0),
            (lambda q, p, t, pt: q[1], lambda q, p, t, pt: t, 0.0),
            (lambda q, p, t, pt: p[1], lambda q, p, t, pt: q[1], -1.0),
        ],
    )
    def test_canonical_pairs(self, f, g, expected):
        assert poisson_bracket(f, g, self.STATE) == pytest.approx(expected, abs=1e-8)

    def test_antisymmetry(self, rng):
        for _ in range(20):
            a = rng.normal(size=6)
            f = lambda q, p, t, pt: np.sin(a[0] * q[0] + p[1]) * np.exp(a[1] * t) + a[2] * pt * q[1]
            g = lambda q, p, t, pt: np.cos(a[3] * p[0] - q[1]) + a[4] * t * pt**2 + a[5] * q[0] * p[0]
            assert abs(poisson_bracket(f, g, self.STATE) + poisson_bracket(g, f, self.STATE)) < 1e-10

    def test_constraint_generates_time_flow(self):
        model = harmonic_oscillator()
        H_ext = lambda q, p, t, pt: pt + physical_hamiltonian(model, q, p, t)
        state = PhaseState([0.4], [0.9], 0.0, -0.485)
        assert poisson_bracket(lambda q, p, t, pt: t, H_ext, state) == pytest.approx(1.0, abs=1e-8)
        assert poisson_bracket(lambda q, p, t, pt: q[0], H_ext, state) == pytest.approx(0.9, abs=1e-8)


class TestRelativistic:
    def test_rest(self):
        p, p_t = relativistic_momenta([0.0], PhysicalConstants(1.0, 3.0, 2.0))
        assert p[0] == 0.0 and p_t == pytest.approx(-18.0, rel=1e-15)

    def test_point(self):
        p, p_t = relativistic_momenta([0.6], UNIT)
        assert p[0] == pytest.approx(0.75, abs=1e-15)
        assert p_t == pytest.approx(-1.25, abs=1e-15)
        assert abs(p_t + np.sqrt(1 + p[0] ** 2)) < 1e-14

    def test_mass_shell_sweep(self, rng):
        const = PhysicalConstants(1.0, 2.5, 0.7)
        c, m = const.c, const.mass
        for v in rng.uniform(-0.99 * c, 0.99 * c, size=100):
            p, p_t = relativistic_momenta([v], const)
            shell = -c * np.sqrt(m**2 * c**2 + p[0] ** 2)
            assert abs(p_t - shell) < 1e-12 * abs(shell)

    @pytest.mark.parametrize("v", [1.0, -1.5])
    def test_superluminal(self, v):
        with pytest.raises(SuperluminalError):
            relativistic_momenta([v], UNIT)

    def test_covariant_form(self, rng):
        const = PhysicalConstants(1.0, 2.0, 1.5)
        for _ in range(20):
            tdot = rng.uniform(0.1, 4)
            xdot = rng.uniform(-0.95, 0.95) * const.c * tdot
            a = ri_relativistic_lagrangian([xdot], tdot, const)
            b = covariant_relativistic_lagrangian([xdot], tdot, const)
            assert a == pytest.approx(b, rel=1e-12)

    def test_constraint_along_motion(self):
        model = relativistic_particle(UNIT)
        traj = integrate_physical(model, [0.0], [0.9], 0.0, 1.0, 0.01)
        assert max(abs(ri_constraint(model, s)) for s in traj.samples) < 1e-8
