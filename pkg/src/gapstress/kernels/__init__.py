import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from gapstress.elasticity import Matrix2, as_matrix, stress_from_gradient
from gapstress.logs import loggers

logger = loggers["Kernels"]

POLE_RADIUS = 1e-12


class Nucleus(str, Enum):
    KELVIN_COL_1 = "kelvin_col_1"
    KELVIN_COL_2 = "kelvin_col_2"
    RADIAL = "radial"
    ROTATIONAL = "rotational"


def _components(x, center=(0.0, 0.0)):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[0] - center[0], x[1] - center[1]
    r2 = x1 * x1 + x2 * x2
    if np.any(r2 < POLE_RADIUS ** 2):
        raise ValueError(f"Kernel evaluated within {POLE_RADIUS} of its pole at {tuple(center)}")
    return x1, x2, r2


def kelvin_matrix(x, m):
    """
    Returns the Kelvin matrix Γ_ij(x) = α1 δ_ij ln|x| − α2 x_i x_j/|x|².

    Raises:
        ValueError: At the origin.
    """
    x1, x2, r2 = _components(x)
    lnr = 0.5 * np.log(r2)
    a1, a2 = m.alpha1, m.alpha2
    off = -a2 * x1 * x2 / r2
    return Matrix2(a1 * lnr - a2 * x1 * x1 / r2, off, off, a1 * lnr - a2 * x2 * x2 / r2)


def nucleus_displacement(which, x, m, center=(0.0, 0.0)):
    """
    Returns the displacement (u1, u2) of one nucleus of strain placed at `center`: a Kelvin
    column Γe_k, the radial field x/|x|² or the rotational field x⊥/|x|², x⊥ = (−x2, x1).
    """
    x1, x2, r2 = _components(x, center)
    match Nucleus(which):
        case Nucleus.KELVIN_COL_1 | Nucleus.KELVIN_COL_2:
            k = 0 if Nucleus(which) == Nucleus.KELVIN_COL_1 else 1
            lnr = 0.5 * np.log(r2)
            xs = (x1, x2)
            return tuple(m.alpha1 * (i == k) * lnr - m.alpha2 * xs[i] * xs[k] / r2 for i in (0, 1))
        case Nucleus.RADIAL:
            return x1 / r2, x2 / r2
        case Nucleus.ROTATIONAL:
            return -x2 / r2, x1 / r2


def kernel_gradient(which, x, m, center=(0.0, 0.0)):
    """
    Returns the exact gradient g_il = ∂_l u_i of a nucleus of strain.

    Raises:
        ValueError: At the pole.
    """
    x1, x2, r2 = _components(x, center)
    r4 = r2 * r2
    xs = (x1, x2)
    match Nucleus(which):
        case Nucleus.KELVIN_COL_1 | Nucleus.KELVIN_COL_2:
            k = 0 if Nucleus(which) == Nucleus.KELVIN_COL_1 else 1
            a1, a2 = m.alpha1, m.alpha2
            g = [[a1 * (i == k) * xs[l] / r2
                  - a2 * (((i == l) * xs[k] + xs[i] * (k == l)) / r2 - 2 * xs[i] * xs[k] * xs[l] / r4)
                  for l in (0, 1)] for i in (0, 1)]
            return Matrix2(g[0][0], g[0][1], g[1][0], g[1][1])
        case Nucleus.RADIAL:
            return Matrix2(1 / r2 - 2 * x1 * x1 / r4, -2 * x1 * x2 / r4, -2 * x1 * x2 / r4, 1 / r2 - 2 * x2 * x2 / r4)
        case Nucleus.ROTATIONAL:
            return Matrix2(2 * x1 * x2 / r4, -1 / r2 + 2 * x2 * x2 / r4, 1 / r2 - 2 * x1 * x1 / r4, -2 * x1 * x2 / r4)


@dataclass(frozen=True)
class KernelContext:
    """
    Holds what the singular functions q1, q2 need: the material and the fixed points
    p1 = (−a, 0), p2 = (a, 0).
    """
    material: object
    p1: tuple
    p2: tuple
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"Fixed point offset must be positive, got a={self.a}")
        if tuple(self.p1) != (-self.a, 0.0) or tuple(self.p2) != (self.a, 0.0):
            raise ValueError(f"Fixed points {self.p1}, {self.p2} do not match a={self.a}")

    @classmethod
    def from_offset(cls, material, a):
        a = float(a)
        return cls(material, (-a, 0.0), (a, 0.0), a)

    @classmethod
    def from_geometry(cls, g, material):
        return cls.from_offset(material, g.a)


def _check_j(j):
    if j not in (1, 2):
        raise ValueError(f"Loading index j must be 1 or 2, got {j}")


def _blocks(j):
    # (Kelvin column, correcting nucleus, sign of the correction)
    return (Nucleus.KELVIN_COL_1, Nucleus.RADIAL, 1.0) if j == 1 else (Nucleus.KELVIN_COL_2, Nucleus.ROTATIONAL, -1.0)


def singular_displacement(ctx, j, x):
    """
    Returns q_j(x) as an array of shape (2, ...):

        q1 = Γ(x−p1)e1 − Γ(x−p2)e1 + α2 a (R(x−p1) + R(x−p2))
        q2 = Γ(x−p1)e2 − Γ(x−p2)e2 − α2 a (Rot(x−p1) + Rot(x−p2))

    with R(x) = x/|x|² and Rot(x) = x⊥/|x|².

    Raises:
        ValueError: Within the pole radius of p1 or p2, or for j outside {1, 2}.
    """
    _check_j(j)
    m = ctx.material
    kelvin, nucleus, sign = _blocks(j)
    k1 = nucleus_displacement(kelvin, x, m, ctx.p1)
    k2 = nucleus_displacement(kelvin, x, m, ctx.p2)
    n1 = nucleus_displacement(nucleus, x, m, ctx.p1)
    n2 = nucleus_displacement(nucleus, x, m, ctx.p2)
    c = sign * m.alpha2 * ctx.a
    return np.array([k1[i] - k2[i] + c * (n1[i] + n2[i]) for i in (0, 1)])


def singular_gradient(ctx, j, x):
    _check_j(j)
    m = ctx.material
    kelvin, nucleus, sign = _blocks(j)
    c = sign * m.alpha2 * ctx.a
    return (kernel_gradient(kelvin, x, m, ctx.p1) - kernel_gradient(kelvin, x, m, ctx.p2)
            + c * (kernel_gradient(nucleus, x, m, ctx.p1) + kernel_gradient(nucleus, x, m, ctx.p2)))


def singular_stress(ctx, j, x):
    """Returns ℂ∇̂q_j(x), unscaled."""
    return stress_from_gradient(singular_gradient(ctx, j, x), ctx.material)


def conormal(ctx, j, x, n):
    """Returns the traction ∂_ν q_j = (ℂ∇̂q_j)n as a pair of components."""
    return singular_stress(ctx, j, x).traction(n[0], n[1])


class DisplacementField:
    """
    Represents a displacement field through its closed-form value and gradient.

    Args:
        displacement (callable): point(s) of shape (2, ...) → array of shape (2, ...).
        gradient (callable): point(s) → Matrix2 with g_il = ∂_l u_i.
        name (str): Label used in logs.
    """
    def __init__(self, displacement, gradient, name="field"):
        self.displacement = displacement
        self.gradient = gradient
        self.name = name

    def __call__(self, x):
        return self.displacement(x)

    def __repr__(self):
        return f"<DisplacementField {self.name}>"


def nucleus_field(which, m, center=(0.0, 0.0)):
    which = Nucleus(which)
    return DisplacementField(
        lambda x: np.array(nucleus_displacement(which, x, m, center)),
        lambda x: kernel_gradient(which, x, m, center),
        which.value,
    )


def singular_field(ctx, j):
    _check_j(j)
    return DisplacementField(lambda x: singular_displacement(ctx, j, x), lambda x: singular_gradient(ctx, j, x), f"q{j}")


def finite_difference_gradient(field, x, h=1e-6):
    """Central-difference gradient of a DisplacementField at a single point."""
    x = np.asarray(x, dtype=float)
    cols = []
    for l in (0, 1):
        step = np.zeros(2)
        step[l] = h
        cols.append((np.asarray(field(x + step)) - np.asarray(field(x - step))) / (2 * h))
    return Matrix2(cols[0][0], cols[1][0], cols[0][1], cols[1][1])


def stress_divergence(stress, x, h):
    """
    Central-difference divergence (∂_1σ_i1 + ∂_2σ_i2)_i of a stress callable.

    Args:
        stress (callable): Maps points of shape (2, ...) to a SymTensor2 or Matrix2.
        x (array): Points of shape (2, ...).
        h (float | array): Step, scalar or one per point.
    """
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    e1, e2 = np.zeros_like(x), np.zeros_like(x)
    e1[0], e2[1] = h, h
    matrix = lambda p: as_matrix(stress(p))
    dx = (matrix(x + e1) - matrix(x - e1)) * (1 / (2 * h))
    dy = (matrix(x + e2) - matrix(x - e2)) * (1 / (2 * h))
    return np.array([dx.g11 + dy.g12, dx.g21 + dy.g22], dtype=float)


def gradient_mismatch(field, x, h=1e-6):
    """Relative gap between the closed-form gradient and its central-difference estimate."""
    exact = field.gradient(x)
    approx = finite_difference_gradient(field, x, h)
    scale = max(float(exact.norm()), math.ulp(1.0))
    return float((exact - approx).norm()) / scale
