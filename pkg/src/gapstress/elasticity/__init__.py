import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from gapstress.logs import loggers

logger = loggers["Elasticity"]


@dataclass(frozen=True)
class LameMaterial:
    """
    Represents an isotropic plane-strain matrix material.

    Args:
        lam (float): First Lamé constant.
        mu (float): Shear modulus.

    Raises:
        ValueError: If the pair violates strong ellipticity (mu > 0, lam + mu > 0).
    """
    lam: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and math.isfinite(self.mu)):
            raise ValueError(f"Lamé constants must be finite, got lambda={self.lam}, mu={self.mu}")
        if self.mu <= 0 or self.lam + self.mu <= 0:
            raise ValueError(f"Lamé pair (lambda={self.lam}, mu={self.mu}) is not strongly elliptic")

    @property
    def rho(self):
        return self.lam / (2 * (self.lam + self.mu))

    @property
    def E(self):
        return self.mu * (3 * self.lam + 2 * self.mu) / (self.lam + self.mu)

    @property
    def alpha1(self):
        return (1 / self.mu + 1 / (2 * self.mu + self.lam)) / (4 * math.pi)

    @property
    def alpha2(self):
        return (1 / self.mu - 1 / (2 * self.mu + self.lam)) / (4 * math.pi)

    @property
    def prefactor(self):
        rho = self.rho
        return (1 + rho) * (1 - 2 * rho) / (1 - rho)


class DerivedConstants(NamedTuple):
    rho: float
    E: float
    alpha1: float
    alpha2: float
    prefactor: float


@dataclass(frozen=True)
class SymTensor2:
    """
    Symmetric 2x2 tensor stored by its three independent components.

    Components may be floats or numpy arrays of a common shape, in which case the tensor
    is a field sampled at many points at once.
    """
    a11: object
    a12: object
    a22: object

    def __add__(self, other):
        return SymTensor2(self.a11 + other.a11, self.a12 + other.a12, self.a22 + other.a22)

    def __sub__(self, other):
        return SymTensor2(self.a11 - other.a11, self.a12 - other.a12, self.a22 - other.a22)

    def __mul__(self, factor):
        return SymTensor2(factor * self.a11, factor * self.a12, factor * self.a22)

    __rmul__ = __mul__

    @property
    def trace(self):
        return self.a11 + self.a22

    def contract(self, other):
        """Full contraction A:B, off-diagonal counted twice."""
        return self.a11 * other.a11 + 2 * self.a12 * other.a12 + self.a22 * other.a22

    def traction(self, n1, n2):
        """Returns the vector σn as a pair of components."""
        return self.a11 * n1 + self.a12 * n2, self.a12 * n1 + self.a22 * n2

    def to_matrix(self):
        return Matrix2(self.a11, self.a12, self.a12, self.a22)

    def norm(self):
        return np.sqrt(self.contract(self))


@dataclass(frozen=True)
class Matrix2:
    """
    General 2x2 matrix; ``g[i][k]`` is stored as ``g{i+1}{k+1}``.

    Displacement gradients use the row-component convention g_ik = ∂_k u_i. Components may be
    numpy arrays, as for SymTensor2.
    """
    g11: object
    g12: object
    g21: object
    g22: object

    def __add__(self, other):
        return Matrix2(self.g11 + other.g11, self.g12 + other.g12, self.g21 + other.g21, self.g22 + other.g22)

    def __sub__(self, other):
        return Matrix2(self.g11 - other.g11, self.g12 - other.g12, self.g21 - other.g21, self.g22 - other.g22)

    def __mul__(self, factor):
        return Matrix2(factor * self.g11, factor * self.g12, factor * self.g21, factor * self.g22)

    __rmul__ = __mul__

    @property
    def T(self):
        return Matrix2(self.g11, self.g21, self.g12, self.g22)

    @property
    def trace(self):
        return self.g11 + self.g22

    def sym(self):
        return SymTensor2(self.g11, (self.g12 + self.g21) / 2, self.g22)

    def contract(self, other):
        return self.g11 * other.g11 + self.g12 * other.g12 + self.g21 * other.g21 + self.g22 * other.g22

    def traction(self, n1, n2):
        return self.g11 * n1 + self.g12 * n2, self.g21 * n1 + self.g22 * n2

    def norm(self):
        return np.sqrt(self.contract(self))


def as_matrix(t):
    return t.to_matrix() if isinstance(t, SymTensor2) else t


def stress_from_gradient(g, m):
    """
    Returns σ = ℂ∇̂u for a displacement gradient g (or an already symmetric strain).
    """
    if isinstance(g, SymTensor2):
        g = g.to_matrix()
    return SymTensor2(
        (m.lam + 2 * m.mu) * g.g11 + m.lam * g.g22,
        m.mu * (g.g12 + g.g21),
        m.lam * g.g11 + (m.lam + 2 * m.mu) * g.g22,
    )


def compliance_apply(s, m):
    """
    Returns e = ℂ⁻¹σ = σ/(2μ) − λ tr(σ) I / (2μ(2λ+2μ)).

    A general Matrix2 is mapped componentwise by the same isotropic formula.
    """
    shift = m.lam * s.trace / (2 * m.mu * (2 * m.lam + 2 * m.mu))
    if isinstance(s, SymTensor2):
        return SymTensor2(s.a11 / (2 * m.mu) - shift, s.a12 / (2 * m.mu), s.a22 / (2 * m.mu) - shift)
    return Matrix2(s.g11 / (2 * m.mu) - shift, s.g12 / (2 * m.mu), s.g21 / (2 * m.mu), s.g22 / (2 * m.mu) - shift)


def compliance_product(a, b, m):
    """
    Returns a : ℂ⁻¹b for symmetric or general 2x2 matrices.
    """
    a, b = as_matrix(a), as_matrix(b)
    return a.contract(b) / (2 * m.mu) - m.lam * a.trace * b.trace / (2 * m.mu * (2 * m.lam + 2 * m.mu))


def derived_constants(m):
    constants = DerivedConstants(m.rho, m.E, m.alpha1, m.alpha2, m.prefactor)
    logger.debug("Derived constants for lambda=%g mu=%g: %s" % (m.lam, m.mu, constants))
    return constants


def energy_density(g, m):
    """
    Returns ℂê:ê = λ tr(ê)² + 2μ ê:ê, ê being the symmetric part of g.
    """
    e = g.sym() if isinstance(g, Matrix2) else g
    return m.lam * e.trace ** 2 + 2 * m.mu * e.contract(e)
