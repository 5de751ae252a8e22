from gapstress.bounds.results import BoundKind, BoundResult, VerificationError, m_constant, unit_loading
from gapstress.bounds.primal import KellerProfile, keller_test_gradient, primal_upper
from gapstress.bounds.dual import DualStress, StressField, build_dual_stress, dual_lower
from gapstress.bounds.identities import contour_flux, decay_ratio, energy_identity_check, expected_flux, flux_identity_check, normalized_energy
