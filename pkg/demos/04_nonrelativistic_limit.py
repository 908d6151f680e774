"""
The nonrelativistic limit
=========================

Removing the rest-energy phase from a square-root solution leaves something
close to a Schrodinger solution.  The leftover frequency error for a plane
wave of wavenumber k is about hbar^3 k^4 / (8 m^3 c^2).
"""

import numpy as np

from reparam_qm import PhysicalConstants, nonrel_frequency_residual

cs = np.array([5.0, 10.0, 20.0, 40.0])
residuals = np.array([nonrel_frequency_residual(PhysicalConstants(1.0, c, 1.0)) for c in cs])
predicted = 1 / (8 * cs**2)

print("   c    residual      1/(8c^2)     ratio")
for c, r, p in zip(cs, residuals, predicted):
    print(f"{c:4.0f}  {r:.6e}  {p:.6e}  {r / p:.4f}")

# The next Taylor term is negative and falls like c^-4, so the ratio tends to 1.
slope = np.polyfit(np.log(cs), np.log(residuals), 1)[0]
print(f"log-log slope: {slope:.3f}")
