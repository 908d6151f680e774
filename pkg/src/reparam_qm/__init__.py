"""Reparametrization-invariant mechanics and relativistic wave propagators on periodic grids."""

__version__ = "0.1.0"

from .spectral import (  # noqa: E402
    ComplexField,
    GridSpec,
    PhysicalConstants,
    RealField,
    SpectralMultiplier,
    apply_multiplier,
    derivative_multiplier,
    identity_multiplier,
    laplacian_multiplier,
    forward_transform,
    inner_product,
    inverse_transform,
    norm,
    sqrt_kg_multiplier,
    uncertainty_product,
    wavenumbers,
)
from .evolution import (  # noqa: E402
    EvolutionParams,
    KleinGordonState,
    SchrodingerState,
    evolve_klein_gordon,
    evolve_schrodinger,
    evolve_sqrt_schrodinger,
    kg_energy,
    nonrel_frequency_residual,
    nonrel_reduce,
    pt_reality_residual,
)
from .equivalence import (  # noqa: E402
    EquivalenceReport,
    density_from_phi,
    k_profile,
    phi_from_psi,
    psi_from_phi,
    verify_equivalence,
)
