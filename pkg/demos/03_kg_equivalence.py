"""
A real field and a complex wave function
========================================

A real Klein-Gordon field phi carries the same information as a complex
solution of the square-root equation.  The forward map is

    psi = -sqrt(mu^2 - laplacian) phi - i phi_dot / c

and the backward map integrates Im psi in time.  Both directions are checked
here on random data.
"""

import numpy as np

from reparam_qm import (
    EvolutionParams,
    GridSpec,
    KleinGordonState,
    PhysicalConstants,
    RealField,
    density_from_phi,
    kg_energy,
    norm,
    phi_from_psi,
    psi_from_phi,
    verify_equivalence,
)

rng = np.random.default_rng(7)
grid = GridSpec(256, 2 * np.pi)
const = PhysicalConstants()


def band_limited(bandwidth=24):
    coeffs = np.zeros(grid.n, dtype=complex)
    j = np.r_[0 : bandwidth + 1, grid.n - bandwidth : grid.n]
    coeffs[j] = rng.normal(size=j.size) + 1j * rng.normal(size=j.size)
    return RealField(grid, np.fft.ifft(coeffs, norm="ortho").real)


phi0 = KleinGordonState(band_limited(), band_limited())

# The wave function's probability density is the field's energy density,
# point by point, and the total energy is the squared norm.
psi0 = psi_from_phi(phi0, const)
gap = np.max(np.abs(np.abs(psi0.values) ** 2 - density_from_phi(phi0, const).values))
print(f"density identity gap: {gap:.1e}")
print(f"energy {kg_energy(phi0, const):.12f}  vs  |psi|^2 {norm(psi0) ** 2:.12f}")

# Going back: phi_from_psi rebuilds the field at any later time.
back = phi_from_psi(psi0, 0.0, const)
print(f"phi recovered at t=0: {np.max(np.abs(back.phi.values - phi0.phi.values)):.1e}")

# verify_equivalence runs all four checks after evolving to T.
report = verify_equivalence(phi0, 1.0, EvolutionParams(0.01, 100, const))
for name, value in report.as_dict().items():
    print(f"{name:22s} {value:.2e}")
