"""Periodic 1-D grids, unitary Fourier transforms and spectral multipliers.

Every operator used by the propagators is diagonal in the Fourier basis and
is represented by a :class:`SpectralMultiplier`: a function of the
wavenumber ``k``.  Transforms use the symmetric ``1/sqrt(n)`` normalization
in both directions, so Parseval's identity carries no extra factors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Union

import numpy as np

__all__ = [
    "GridMismatchError",
    "NormalizationError",
    "LocalizationError",
    "GridSpec",
    "PhysicalConstants",
    "ComplexField",
    "RealField",
    "SpectralMultiplier",
    "wavenumbers",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "identity_multiplier",
    "laplacian_multiplier",
    "derivative_multiplier",
    "sqrt_kg_multiplier",
    "inner_product",
    "norm",
    "Uncertainty",
    "uncertainty_product",
]


class GridMismatchError(ValueError):
    """Two fields (or a field and a potential) live on different grids."""


class NormalizationError(ValueError):
    pass


class LocalizationError(ValueError):
    """State carries too much probability near the periodic boundary."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid ``x_j = j * length / n`` on ``[0, length)``."""

    n: int
    length: float

    def __post_init__(self):
        n = int(self.n)
        if n != self.n or n < 8 or n & (n - 1):
            raise ValueError(f"grid.n must be a power of two >= 8, got {self.n!r}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError(f"grid.length must be positive, got {self.length!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    @property
    def nyquist_index(self) -> int:
        """Array index of the unpaired ``j = -n/2`` mode."""
        return self.n // 2


@dataclass(frozen=True)
class PhysicalConstants:
    """``hbar``, ``c`` and particle ``mass``; ``mu = mass * c / hbar``.

    ``mass = 0`` is accepted to reach the massless limit of the multipliers;
    anything relying on ``mu > 0`` checks for it explicitly.
    """

    hbar: float = 1.0
    c: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "c"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"constants.{name} must be positive, got {value!r}")
        if not (np.isfinite(self.mass) and self.mass >= 0):
            raise ValueError(f"constants.mass must be non-negative, got {self.mass!r}")

    @property
    def mu(self) -> float:
        return self.mass * self.c / self.hbar

    @property
    def rest_energy(self) -> float:
        return self.mass * self.c**2


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ComplexField:
    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = _frozen_array(self.values, np.complex128)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite samples")
        object.__setattr__(self, "values", values)

    @property
    def real(self) -> "RealField":
        return RealField(self.grid, self.values.real)

    @property
    def imag(self) -> "RealField":
        return RealField(self.grid, self.values.imag)

    def __add__(self, other: "ComplexField") -> "ComplexField":
        _check_same_grid(self, other)
        return ComplexField(self.grid, self.values + other.values)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        _check_same_grid(self, other)
        return ComplexField(self.grid, self.values - other.values)

    def __mul__(self, scalar: complex) -> "ComplexField":
        return ComplexField(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class RealField:
    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if np.iscomplexobj(values):
            raise TypeError("RealField requires real samples")
        values = _frozen_array(values, np.float64)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite samples")
        object.__setattr__(self, "values", values)

    def to_complex(self) -> ComplexField:
        return ComplexField(self.grid, self.values)

    def __add__(self, other: "RealField") -> "RealField":
        _check_same_grid(self, other)
        return RealField(self.grid, self.values + other.values)

    def __sub__(self, other: "RealField") -> "RealField":
        _check_same_grid(self, other)
        return RealField(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "RealField":
        return RealField(self.grid, self.values * scalar)

    __rmul__ = __mul__


Field = Union[ComplexField, RealField]


def _check_same_grid(f, g):
    if f.grid != g.grid:
        raise GridMismatchError(f"incompatible grids: {f.grid} vs {g.grid}")


@dataclass(frozen=True)
class SpectralMultiplier:
    """Operator acting as ``f_hat(k) -> evaluator(k) * f_hat(k)``.

    ``zero_nyquist`` is set for multipliers odd in ``k`` (derivatives): their
    value on the unpaired Nyquist mode is zeroed so that the operator stays
    hermitian and maps real fields to real fields.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    label: str = "multiplier"
    zero_nyquist: bool = False

    def __call__(self, k) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(k, dtype=float)))

    def on_grid(self, grid: GridSpec) -> np.ndarray:
        values = np.array(self(wavenumbers(grid)), dtype=complex) * np.ones(grid.n)
        if self.zero_nyquist:
            values[grid.nyquist_index] = 0.0
        return values

    def __mul__(self, other: "SpectralMultiplier") -> "SpectralMultiplier":
        f, g = self.evaluator, other.evaluator
        return SpectralMultiplier(
            lambda k: f(k) * g(k),
            label=f"({self.label})*({other.label})",
            zero_nyquist=self.zero_nyquist or other.zero_nyquist,
        )


def wavenumbers(grid: GridSpec) -> np.ndarray:
    """``2*pi*j/L`` in FFT order: ``j = 0..n/2-1`` then ``-n/2..-1``."""
    return 2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.spacing)


def forward_transform(f: Field) -> np.ndarray:
    return np.fft.fft(f.values, norm="ortho")


def inverse_transform(coeffs, grid: GridSpec) -> ComplexField:
    return ComplexField(grid, np.fft.ifft(coeffs, norm="ortho"))


def apply_multiplier(f: Field, m: SpectralMultiplier) -> Field:
    """Apply ``m`` in Fourier space.

    A :class:`RealField` input returns a :class:`RealField` (the imaginary
    round-off is discarded), which is exact for multipliers satisfying
    ``m(-k) = conj(m(k))``.
    """
    coeffs = forward_transform(f) * m.on_grid(f.grid)
    out = np.fft.ifft(coeffs, norm="ortho")
    if isinstance(f, RealField):
        return RealField(f.grid, out.real)
    return ComplexField(f.grid, out)


def identity_multiplier() -> SpectralMultiplier:
    return SpectralMultiplier(lambda k: np.ones_like(k), label="1")


def laplacian_multiplier() -> SpectralMultiplier:
    return SpectralMultiplier(lambda k: -(k**2), label="laplacian")


def derivative_multiplier(order: int = 1) -> SpectralMultiplier:
    return SpectralMultiplier(
        lambda k: (1j * k) ** order, label=f"d^{order}/dx^{order}", zero_nyquist=bool(order % 2)
    )


def sqrt_kg_multiplier(constants: PhysicalConstants) -> SpectralMultiplier:
    """``sqrt(mu^2 - laplacian)``, i.e. ``k -> sqrt(mu^2 + k^2)``."""
    mu = constants.mu
    return SpectralMultiplier(lambda k: np.sqrt(mu**2 + k**2), label="sqrt(mu^2-laplacian)")


def inner_product(f: Field, g: Field) -> complex:
    """``sum(conj(f) * g) * dx``."""
    _check_same_grid(f, g)
    return complex(np.vdot(f.values, g.values) * f.grid.spacing)


def norm(f: Field) -> float:
    return float(np.sqrt(inner_product(f, f).real))


class Uncertainty(NamedTuple):
    dx: float
    dp: float
    bound: float

    @property
    def product(self) -> float:
        return self.dx * self.dp


def uncertainty_product(
    f: ComplexField, constants: PhysicalConstants, boundary_tol: float = 1e-6
) -> Uncertainty:
    """Position and momentum standard deviations of a normalized state.

    The probability density is recentered on ``L/2`` (via its circular mean)
    before the flat-chart position variance is taken; states with more than
    ``boundary_tol`` probability within ``L/8`` of the box edge are rejected.
    """
    grid = f.grid
    nrm = norm(f)
    if abs(nrm - 1.0) > 1e-10:
        raise NormalizationError(f"state norm is {nrm!r}, expected 1 within 1e-10")

    rho = np.abs(f.values) ** 2 * grid.spacing
    x = grid.x
    angle = np.angle(np.sum(rho * np.exp(2j * np.pi * x / grid.length)))
    center = (angle % (2 * np.pi)) * grid.length / (2 * np.pi)
    shift = int(round((grid.length / 2 - center) / grid.spacing))
    rho = np.roll(rho, shift)

    edge = (x < grid.length / 8) | (x > 7 * grid.length / 8)
    if rho[edge].sum() > boundary_tol:
        raise LocalizationError(
            f"{rho[edge].sum():.3e} of the probability lies within L/8 of the boundary"
        )
    mean_x = np.sum(x * rho)
    var_x = np.sum((x - mean_x) ** 2 * rho)

    weights = np.abs(forward_transform(f)) ** 2
    weights /= weights.sum()
    k = wavenumbers(grid)
    k_odd = k.copy()
    k_odd[grid.nyquist_index] = 0.0
    mean_k = np.sum(k_odd * weights)
    var_k = np.sum(k**2 * weights) - mean_k**2

    return Uncertainty(
        float(np.sqrt(var_x)), float(constants.hbar * np.sqrt(var_k)), constants.hbar / 2
    )
