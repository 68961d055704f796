"""Physically grounded numerics for dense ("holographic") planar MIMO arrays.

Mutual coupling acts as a deconvolution of the element pattern and correlated
fading as a convolution with the angular spectrum; this package builds both
operators, the wavenumber-domain (Fourier) channel model that diagonalizes
them at large apertures, and the capacity analysis on top.
"""

__version__ = "0.1.0"

from .geometry import (ArrayGeometry, PhysicalConstants, array_response, build_ula,
                       build_upa, geometry_from_config)
from .spectra import (AngularSpectrum, AntennaPattern, HemisphereQuadrature, Support,
                      cap_constant, cap_spectrum, check_normalization, isotropic_spectrum,
                      matched_pattern, omni_pattern, pattern_covers, quadrature_for)
from .coupling import (CouplingMatrix, SingularCouplingError, coupling_closed_form,
                       coupling_general, regularize, spd_inv_sqrt, spd_sqrt,
                       write_coupling_csv)
from .fourier import (FourierBasis, WavenumberLattice, build_fourier_basis, build_lattice,
                      dof_prime, fourier_matrix, projected_solid_angles, solid_angles,
                      variances_coupled, variances_uncoupled, write_variances_csv)
from .channel import (ChannelModel, CorrelationMatrix, coupled_correlation_exact,
                      exact_correlation, exact_model, fourier_correlation, fourier_model,
                      iid_model, sample_exact_channel, sample_fourier_channel)
from .capacity import (BoundCheck, CapacityCurve, DofCheck, PrecoderMatrix,
                       WaterfillingAllocation, ergodic_capacity, high_snr_dof_check,
                       los_precoder, low_snr_allocation, low_snr_bound_check,
                       matched_filter_precoder, mutual_information_bits, optimal_precoder,
                       precoded_mutual_information, waterfill)

__all__ = [name for name in dir() if not name.startswith("_")]
