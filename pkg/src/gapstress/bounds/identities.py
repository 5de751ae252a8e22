import math

import numpy as np

from gapstress.bounds.results import m_constant, unit_loading
from gapstress.geometry import circle, inclusion_boundary
from gapstress.kernels import KernelContext, conormal, singular_displacement
from gapstress.logs import loggers
from gapstress.quadrature import PATH_SPEC, integrate_path

logger = loggers["Bounds"]


def expected_flux(i, j, k):
    return float((-1) ** i * (j == k))


def _traction_integrand(ctx, j):
    def integrand(x, y, nx, ny):
        return np.array(conormal(ctx, j, np.stack([x, y]), (nx, ny)))
    return integrand


def flux_identity_check(geom, material, i, j, k, spec=PATH_SPEC):
    """
    Returns ∫_{∂D_i} ∂_ν q_j · Ψ_k with n pointing out of Y′ (into D_i); the exact value is
    (−1)^i δ_jk.
    """
    unit_loading(j)
    psi = unit_loading(k)
    ctx = KernelContext.from_geometry(geom, material)
    res = integrate_path(inclusion_boundary(geom, i), _traction_integrand(ctx, j), spec)
    value = float(psi @ res.value)
    logger.debug("Flux i=%d j=%d k=%d eps=%g: %.17g" % (i, j, k, geom.eps, value))
    return value


def energy_identity_check(geom, material, j, spec=PATH_SPEC):
    """
    Returns ∫_{∂D1 ∪ ∂D2} ∂_ν q_j · q_j, close to √eps / m_j for small eps.
    """
    ctx = KernelContext.from_geometry(geom, material)

    def integrand(x, y, nx, ny):
        p = np.stack([x, y])
        t = np.array(conormal(ctx, j, p, (nx, ny)))
        return (t * singular_displacement(ctx, j, p)).sum(axis=0)

    res = integrate_path([inclusion_boundary(geom, 1), inclusion_boundary(geom, 2)], integrand, spec)
    logger.debug("Energy identity j=%d eps=%g: %.17g (normalised %.6f)" % (j, geom.eps, res.value, normalized_energy(geom, material, j, res.value)))
    return float(res.value)


def normalized_energy(geom, material, j, value):
    """m_j · value / √eps, which tends to 1."""
    return m_constant(material, geom.kappa0, j) * value / math.sqrt(geom.eps)


def contour_flux(geom, material, j, center, radius, spec=PATH_SPEC):
    """
    Returns ∮ (ℂ∇̂q_j)n ds over a circle, n pointing away from the centre. Any circle that
    encloses p2 but not p1 gives the same vector.
    """
    ctx = KernelContext.from_geometry(geom, material)
    return integrate_path(circle(center, radius), _traction_integrand(ctx, j), spec).value


def decay_ratio(geom, material, j, points=41):
    """
    Returns sup |q_j| / √eps over the top cell edge y = L2, bounded over a sweep in eps.

    On the axis x = 0 the leading term of q_1 cancels by symmetry, so the supremum is taken
    along the whole edge.
    """
    ctx = KernelContext.from_geometry(geom, material)
    x = np.linspace(-geom.L1, geom.L1, points)
    q = singular_displacement(ctx, j, np.stack([x, np.full_like(x, geom.L2)]))
    return float(np.hypot(q[0], q[1]).max()) / math.sqrt(geom.eps)
