"""
Position and momentum spreads
=============================

A Gaussian with no chirp saturates dx dp = hbar / 2.  Adding a chirp or
superposing packets only raises the product.
"""

import numpy as np

from reparam_qm import ComplexField, GridSpec, PhysicalConstants, norm, uncertainty_product
from reparam_qm.runner import random_localized_state

grid = GridSpec(256, 2 * np.pi)
const = PhysicalConstants(hbar=1.0)
sigma = grid.length / 32
x = grid.x - grid.length / 2

for chirp in (0.0, 1.0, 5.0):
    psi = ComplexField(grid, np.exp(-(x**2) / (4 * sigma**2) + 1j * chirp * x**2))
    u = uncertainty_product(psi * (1 / norm(psi)), const)
    print(f"chirp {chirp:3.1f}: dx={u.dx:.6f} dp={u.dp:.6f} product/bound={u.product / u.bound:.10f}")

rng = np.random.default_rng(3)
ratios = [
    uncertainty_product(random_localized_state(grid, rng), const).product / (const.hbar / 2)
    for _ in range(20)
]
print(f"20 random packets: min ratio {min(ratios):.4f}, max {max(ratios):.4f}")
