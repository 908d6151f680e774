import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reparam_qm.spectral import (
    ComplexField,
    GridMismatchError,
    GridSpec,
    LocalizationError,
    NormalizationError,
    PhysicalConstants,
    RealField,
    SpectralMultiplier,
    apply_multiplier,
    derivative_multiplier,
    forward_transform,
    identity_multiplier,
    inner_product,
    inverse_transform,
    laplacian_multiplier,
    norm,
    sqrt_kg_multiplier,
    uncertainty_product,
    wavenumbers,
)

from conftest import band_limited, direct_dft_matrix


class TestGrid:
    @pytest.mark.parametrize("n", [0, 4, 12, 100])
    def test_rejects_bad_point_counts(self, n):
        with pytest.raises(ValueError, match="power of two"):
            GridSpec(n, 1.0)

    def test_rejects_nonpositive_length(self):
        with pytest.raises(ValueError, match="positive"):
            GridSpec(8, 0.0)

    def test_spacing(self):
        g = GridSpec(64, 3.0)
        assert g.spacing * g.n == pytest.approx(g.length, rel=1e-15)

    def test_constants(self):
        c = PhysicalConstants(hbar=2.0, c=3.0, mass=5.0)
        assert c.mu == 7.5
        with pytest.raises(ValueError, match="hbar"):
            PhysicalConstants(hbar=0.0)
        with pytest.raises(ValueError, match="mass"):
            PhysicalConstants(mass=-1.0)


class TestWavenumbers:
    def test_unit_box(self):
        np.testing.assert_allclose(
            wavenumbers(GridSpec(8, 2 * np.pi)), [0, 1, 2, 3, -4, -3, -2, -1], atol=1e-15
        )

    def test_scaled_box(self):
        np.testing.assert_allclose(
            wavenumbers(GridSpec(8, np.pi)), [0, 2, 4, 6, -8, -6, -4, -2], atol=1e-14
        )

    @pytest.mark.parametrize("n", [8, 32, 1024])
    def test_single_zero_mode(self, n):
        assert np.count_nonzero(wavenumbers(GridSpec(n, 1.7)) == 0) == 1


class TestTransform:
    def test_delta(self):
        g = GridSpec(16, 1.0)
        delta = np.zeros(16)
        delta[0] = 1.0
        np.testing.assert_allclose(forward_transform(ComplexField(g, delta)), np.full(16, 0.25), atol=1e-15)

    def test_constant(self):
        g = GridSpec(16, 1.0)
        coeffs = forward_transform(ComplexField(g, np.ones(16)))
        expected = np.zeros(16)
        expected[0] = 4.0
        np.testing.assert_allclose(coeffs, expected, atol=1e-14)

    def test_matches_direct_summation(self, rng):
        g = GridSpec(32, 2.0)
        f = band_limited(g, rng, 15)
        np.testing.assert_allclose(forward_transform(f), direct_dft_matrix(32) @ f.values, atol=1e-13)

    def test_round_trip(self, grid, rng):
        f = ComplexField(grid, rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n))
        back = inverse_transform(forward_transform(f), grid)
        assert np.max(np.abs(back.values - f.values)) < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(3, 10), st.integers(0, 2**32 - 1))
    def test_parseval(self, log_n, seed):
        rng = np.random.default_rng(seed)
        g = GridSpec(2**log_n, 1.0)
        f = ComplexField(g, rng.normal(size=g.n) + 1j * rng.normal(size=g.n))
        lhs = np.sum(np.abs(f.values) ** 2)
        rhs = np.sum(np.abs(forward_transform(f)) ** 2)
        assert abs(lhs - rhs) <= 1e-12 * lhs


class TestMultipliers:
    def test_identity(self, grid, rng):
        f = band_limited(grid, rng)
        np.testing.assert_allclose(apply_multiplier(f, identity_multiplier()).values, f.values, atol=1e-14)

    @pytest.mark.parametrize("mode", [-5, 0, 3, 17])
    def test_plane_wave_eigenfunction(self, grid, mode):
        k = 2 * np.pi * mode / grid.length
        m = SpectralMultiplier(lambda q: np.cos(q) + 1j * q**3, "arbitrary")
        f = ComplexField(grid, np.exp(1j * k * grid.x))
        np.testing.assert_allclose(apply_multiplier(f, m).values, m(k) * f.values, atol=1e-10)

    def test_laplacian_of_sine(self):
        grid = GridSpec(64, 2 * np.pi)
        f = ComplexField(grid, np.sin(grid.x))
        out = apply_multiplier(f, laplacian_multiplier())
        assert np.max(np.abs(out.values + np.sin(grid.x))) < 1e-12

    def test_real_field_stays_real(self, grid):
        f = RealField(grid, np.cos(3 * grid.x))
        out = apply_multiplier(f, derivative_multiplier())
        assert isinstance(out, RealField)
        np.testing.assert_allclose(out.values, -3 * np.sin(3 * grid.x), atol=1e-12)

    def test_sqrt_kg_values(self):
        m = sqrt_kg_multiplier(PhysicalConstants(1.0, 1.0, 1.0))
        assert m(0.0) == 1.0
        assert m(1.0) == pytest.approx(1.4142135623730951, abs=1e-15)
        assert sqrt_kg_multiplier(PhysicalConstants(1.0, 1.0, 0.0))(2.0) == 2.0
        k = np.linspace(-50, 50, 101)
        assert np.all(m(k) > 0)
        np.testing.assert_array_equal(m(k), m(-k))

    def test_derivative_nyquist_zeroed(self):
        g = GridSpec(8, 2 * np.pi)
        values = derivative_multiplier().on_grid(g)
        assert values[g.nyquist_index] == 0

    def test_linear(self, grid, rng):
        f, h = band_limited(grid, rng), band_limited(grid, rng)
        m = sqrt_kg_multiplier(PhysicalConstants())
        lhs = apply_multiplier(f * 2.0 + h * (1 - 3j), m).values
        rhs = 2.0 * apply_multiplier(f, m).values + (1 - 3j) * apply_multiplier(h, m).values
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    @pytest.mark.parametrize(
        "m", [laplacian_multiplier(), sqrt_kg_multiplier(PhysicalConstants(1, 2, 0.3))], ids=["lap", "sqrt"]
    )
    def test_hermitian(self, grid, rng, m):
        for _ in range(5):
            f = ComplexField(grid, rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n))
            g = ComplexField(grid, rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n))
            a = inner_product(f, apply_multiplier(g, m))
            b = inner_product(apply_multiplier(f, m), g)
            scale = max(1.0, abs(a))
            assert abs(a.imag - b.imag) < 1e-12 * scale
            assert abs(a - b) < 1e-12 * scale

    def test_composition(self, grid, rng):
        m1 = sqrt_kg_multiplier(PhysicalConstants(1.0, 1.0, 0.7))
        m2 = laplacian_multiplier()
        f = band_limited(grid, rng)
        seq = apply_multiplier(apply_multiplier(f, m1), m2).values
        prod = apply_multiplier(f, m1 * m2).values
        assert np.max(np.abs(seq - prod)) < 1e-12 * max(1.0, np.max(np.abs(prod)))

    def test_spectral_accuracy_band_limited(self, rng):
        g = GridSpec(128, 5.0)
        j = np.arange(1, 31)  # highest |j| < n/4
        a, b = rng.normal(size=j.size), rng.normal(size=j.size)
        k = 2 * np.pi * j / g.length
        phase = np.outer(g.x, k)
        f = RealField(g, (np.cos(phase) * a + np.sin(phase) * b).sum(axis=1))
        exact = (-(k**2) * (np.cos(phase) * a + np.sin(phase) * b)).sum(axis=1)
        out = apply_multiplier(f, laplacian_multiplier()).values
        assert np.max(np.abs(out - exact)) < 1e-10 * np.max(np.abs(exact))


class TestInnerProduct:
    def test_normalized_constant(self, grid):
        f = ComplexField(grid, np.full(grid.n, 1 / np.sqrt(grid.length)))
        assert norm(f) ** 2 == pytest.approx(1.0, abs=1e-14)

    def test_orthogonal_plane_waves(self, grid):
        f = ComplexField(grid, np.exp(2j * grid.x))
        g = ComplexField(grid, np.exp(5j * grid.x))
        assert abs(inner_product(f, g)) < 1e-12

    def test_conjugate_symmetry(self, grid, rng):
        f = ComplexField(grid, rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n))
        g = ComplexField(grid, rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n))
        assert inner_product(f, g) == pytest.approx(np.conj(inner_product(g, f)), abs=1e-12)

    def test_grid_mismatch(self):
        f = ComplexField(GridSpec(8, 1.0), np.ones(8))
        g = ComplexField(GridSpec(8, 2.0), np.ones(8))
        with pytest.raises(GridMismatchError):
            inner_product(f, g)


def _gaussian(grid, sigma, chirp=0.0, momentum=0.0, center=None):
    center = grid.length / 2 if center is None else center
    x = (grid.x - center + grid.length / 2) % grid.length - grid.length / 2
    f = ComplexField(grid, np.exp(-(x**2) / (4 * sigma**2) + 1j * chirp * x**2 + 1j * momentum * x))
    return f * (1 / norm(f))


class TestUncertainty:
    def test_minimal_gaussian_saturates(self, grid):
        hbar = 0.7
        sigma = grid.length / 32
        u = uncertainty_product(_gaussian(grid, sigma), PhysicalConstants(hbar=hbar))
        assert u.dx == pytest.approx(sigma, rel=1e-10)
        assert u.dp == pytest.approx(hbar / (2 * sigma), rel=1e-10)
        assert abs(u.product - hbar / 2) / (hbar / 2) < 1e-6

    def test_chirped_gaussian_exceeds_bound(self, grid):
        sigma, beta = grid.length / 32, 3.0
        u = uncertainty_product(_gaussian(grid, sigma, chirp=beta), PhysicalConstants())
        # psi ~ exp(-a x^2), a = 1/(4 sigma^2) - i beta  =>  <p^2> = 4 |a|^2 sigma^2
        expected_dp = np.sqrt(1 / (4 * sigma**2) + 4 * beta**2 * sigma**2)
        assert u.dp == pytest.approx(expected_dp, rel=1e-9)
        assert u.product > u.bound

    def test_momentum_boost_keeps_spreads(self, grid):
        sigma = grid.length / 32
        plain = uncertainty_product(_gaussian(grid, sigma), PhysicalConstants())
        boosted = uncertainty_product(_gaussian(grid, sigma, momentum=12.0), PhysicalConstants())
        assert boosted.dx == pytest.approx(plain.dx, rel=1e-10)
        assert boosted.dp == pytest.approx(plain.dp, rel=1e-8)

    def test_recentering_handles_wrapped_state(self, grid):
        sigma = grid.length / 32
        u = uncertainty_product(_gaussian(grid, sigma, center=0.02), PhysicalConstants())
        assert u.dx == pytest.approx(sigma, rel=1e-8)

    def test_rejects_unnormalized(self, grid):
        with pytest.raises(NormalizationError):
            uncertainty_product(_gaussian(grid, 0.2) * 1.01, PhysicalConstants())

    def test_rejects_delocalized(self, grid):
        with pytest.raises(LocalizationError):
            uncertainty_product(_gaussian(grid, grid.length / 4), PhysicalConstants())
