import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class BoundKind(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


class VerificationError(AssertionError):
    """Raised when an identity or structural check falls outside its tolerance."""


@dataclass(frozen=True)
class BoundResult:
    """
    Represents one computed bound on the cell energy ℰ_j.

    Attributes:
        j (int): Loading index.
        kind (BoundKind): ``upper`` (primal) or ``lower`` (dual).
        value (float): The bound.
        quadrature_err (float): Estimated quadrature error of `value`.
        diagnostics (dict): Non-negative structural residuals of the test field.
        terms (dict): Named contributions whose sum is `value`.
        converged (bool): Whether every integration met its tolerance.
        eps (float): Gap width the bound was computed for.
    """
    j: int
    kind: BoundKind
    value: float
    quadrature_err: float
    diagnostics: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)
    converged: bool = True
    eps: float = math.nan

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"{self.kind.value} bound for j={self.j} is not finite: {self.value}")
        if any(v < 0 or not math.isfinite(v) for v in self.diagnostics.values()):
            raise ValueError(f"Diagnostics must be finite and non-negative, got {self.diagnostics}")

    @property
    def scaled(self):
        """The bound times √eps."""
        return self.value * math.sqrt(self.eps)

    def interval(self):
        """The bound widened by its quadrature error."""
        return self.value - self.quadrature_err, self.value + self.quadrature_err


def unit_loading(j):
    """Ψ_j, the unit translation e_j."""
    if j not in (1, 2):
        raise ValueError(f"Loading index j must be 1 or 2, got {j}")
    return np.array([1.0, 0.0]) if j == 1 else np.array([0.0, 1.0])


def m_constant(material, kappa0, j):
    """m1 = π(λ+2μ)/√κ0, m2 = πμ/√κ0."""
    unit_loading(j)
    stiffness = material.lam + 2 * material.mu if j == 1 else material.mu
    return math.pi * stiffness / math.sqrt(kappa0)
