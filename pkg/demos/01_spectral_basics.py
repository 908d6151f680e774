"""
Spectral operators on a periodic grid
=====================================

Every operator in the library is a multiplier in Fourier space.  This demo
builds a grid, checks the transform convention and applies a few
multipliers to simple fields.
"""

import numpy as np

from reparam_qm import (
    ComplexField,
    GridSpec,
    PhysicalConstants,
    RealField,
    apply_multiplier,
    forward_transform,
    inner_product,
    laplacian_multiplier,
    sqrt_kg_multiplier,
    wavenumbers,
)

# A box of length 2 pi with 8 points has integer wavenumbers in FFT order.
grid = GridSpec(8, 2 * np.pi)
print("wavenumbers:", wavenumbers(grid))

# The transform is unitary: a delta spike spreads evenly over all modes.
delta = np.zeros(8)
delta[0] = 1.0
print("delta coefficients:", forward_transform(ComplexField(grid, delta)).real)

# On a finer grid the Laplacian multiplier -k^2 turns sin into -sin.
grid = GridSpec(64, 2 * np.pi)
f = RealField(grid, np.sin(grid.x))
err = np.max(np.abs(apply_multiplier(f, laplacian_multiplier()).values + np.sin(grid.x)))
print(f"laplacian of sin, max error: {err:.2e}")

# sqrt(mu^2 - laplacian) is the relativistic kinetic operator.  At k = 1 and
# mu = 1 it multiplies by sqrt(2).
root = sqrt_kg_multiplier(PhysicalConstants(hbar=1.0, c=1.0, mass=1.0))
g = apply_multiplier(RealField(grid, np.cos(grid.x)), root)
print("ratio at x=0:", g.values[0] / np.cos(0.0))

# Multipliers compose by multiplying their symbols.
both = root * laplacian_multiplier()
print("composed label:", both.label)

# Inner products integrate over the box, so plane waves are orthogonal.
a = ComplexField(grid, np.exp(2j * grid.x))
b = ComplexField(grid, np.exp(5j * grid.x))
print(f"<e^2ix, e^5ix> = {abs(inner_product(a, b)):.1e}")
print(f"<e^2ix, e^2ix> = {inner_product(a, a).real:.6f} (= 2 pi)")
