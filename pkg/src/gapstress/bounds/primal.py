import math
from dataclasses import dataclass

import numpy as np

from gapstress.bounds.results import BoundKind, BoundResult, unit_loading
from gapstress.elasticity import Matrix2, energy_density
from gapstress.logs import loggers
from gapstress.quadrature import CELL_SPEC, integrate_cell

logger = loggers["Bounds"]


@dataclass(frozen=True)
class KellerProfile:
    """
    The scalar profile ψ(x, y) = clamp((x + X̃(y)) / (2X̃(y)), 0, 1) of the Keller-type test
    displacement φ_j = ψΨ_j.

    X̃ equals the gap half-width f inside the neck |y| ≤ L and continues along the tangent of
    f at L, capped at L1. By convexity X̃ ≤ X, so ψ is 0 on Γ₋ and 1 on Γ₊.
    """
    geom: object

    @property
    def neck(self):
        return self.geom.L

    @property
    def edge_width(self):
        return float(self.geom.f(self.geom.L))

    @property
    def edge_slope(self):
        return float(self.geom.fprime(self.geom.L))

    @property
    def cap_height(self):
        """Height where the tangent continuation reaches L1."""
        return self.neck + (self.geom.L1 - self.edge_width) / self.edge_slope

    def breaks(self):
        heights = [self.neck]
        if self.cap_height < self.geom.L2:
            heights.append(self.cap_height)
        return heights

    def halfwidth(self, y):
        y = np.abs(np.asarray(y, dtype=float))
        inside = self.geom.f(np.minimum(y, self.neck))
        tangent = np.minimum(self.geom.L1, self.edge_width + self.edge_slope * (y - self.neck))
        return np.where(y <= self.neck, inside, tangent)

    def halfwidth_derivative(self, y):
        y = np.asarray(y, dtype=float)
        inside = self.geom.fprime(np.clip(y, -self.neck, self.neck))
        tangent = np.where(np.abs(y) < self.cap_height, np.sign(y) * self.edge_slope, 0.0)
        return np.where(np.abs(y) <= self.neck, inside, tangent)

    def psi(self, p):
        x, y = np.asarray(p[0], dtype=float), np.asarray(p[1], dtype=float)
        X = self.halfwidth(y)
        return np.clip((x + X) / (2 * X), 0.0, 1.0)

    def gradient(self, p):
        """Returns (∂ψ/∂x, ∂ψ/∂y); both vanish on the clamped plateaus."""
        x, y = np.asarray(p[0], dtype=float), np.asarray(p[1], dtype=float)
        X = self.halfwidth(y)
        strip = np.abs(x) < X
        dx = np.where(strip, 1 / (2 * X), 0.0)
        dy = np.where(strip, -x * self.halfwidth_derivative(y) / (2 * X ** 2), 0.0)
        return dx, dy


def keller_test_gradient(prof, j, p):
    """
    Returns ∇φ_j at p; row j is ∇ψ and the other row vanishes.
    """
    unit_loading(j)
    dx, dy = prof.gradient(p)
    zero = np.zeros_like(dx)
    return Matrix2(dx, dy, zero, zero) if j == 1 else Matrix2(zero, zero, dx, dy)


def primal_upper(geom, material, j, spec=CELL_SPEC):
    """
    Evaluates the primal functional ∫_{Y′} ℂ∇̂φ_j : ∇̂φ_j on the Keller-type test displacement,
    an upper bound of ℰ_j.

    Returns:
        BoundResult: With terms ``neck`` (|y| < L) and ``extension``.

    Raises:
        QuadratureError: On non-finite values, or when a strict QuadratureSpec is not met.
    """
    prof = KellerProfile(geom)

    def integrand(x, y):
        w = energy_density(keller_test_gradient(prof, j, (x, y)), material)
        neck = np.abs(y) < geom.L
        return np.stack([np.where(neck, w, 0.0), np.where(neck, 0.0, w)])

    res = integrate_cell(geom, integrand, spec, support=prof.halfwidth, breaks_y=prof.breaks())
    neck, extension = (float(v) for v in res.value)
    value = math.fsum((neck, extension))
    logger.info("Upper bound j=%d eps=%g: %.17g (error %.3g, %d panels)" % (j, geom.eps, value, 2 * res.err_estimate, res.panels_used))
    return BoundResult(
        j=j,
        kind=BoundKind.UPPER,
        value=value,
        quadrature_err=2 * res.err_estimate,
        terms={"neck": neck, "extension": extension},
        converged=res.converged,
        eps=geom.eps,
    )
