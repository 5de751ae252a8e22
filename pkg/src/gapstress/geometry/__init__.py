import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from gapstress.logs import loggers

logger = loggers["Geometry"]


class ShapeKind(str, Enum):
    DISK = "disk"
    ELLIPSE = "ellipse"


@dataclass(frozen=True)
class InclusionShape:
    """
    Represents the cross section D of the inclusion, an axis-aligned ellipse.

    Args:
        kind (ShapeKind): ``disk`` or ``ellipse``.
        A (float): Horizontal semi-axis (the radius r0 for a disk).
        B (float): Vertical semi-axis (equal to A for a disk).

    Attributes:
        kappa0 (float): Curvature of ∂D at its horizontal vertex, A/B².
    """
    kind: ShapeKind
    A: float
    B: float

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0 and math.isfinite(self.A) and math.isfinite(self.B)):
            raise ValueError(f"Inclusion semi-axes must be positive and finite, got A={self.A}, B={self.B}")
        if self.kind == ShapeKind.DISK and self.A != self.B:
            raise ValueError(f"A disk needs equal semi-axes, got A={self.A}, B={self.B}")

    @classmethod
    def disk(cls, r0):
        return cls(ShapeKind.DISK, float(r0), float(r0))

    @classmethod
    def ellipse(cls, A, B):
        return cls(ShapeKind.ELLIPSE, float(A), float(B))

    @property
    def r0(self):
        return self.A

    @property
    def half_width(self):
        return self.A

    @property
    def half_height(self):
        return self.B

    @property
    def kappa0(self):
        return self.A / self.B ** 2

    @property
    def area(self):
        return math.pi * self.A * self.B


class Region(Enum):
    MATRIX = "matrix"
    INCLUSION1 = "inclusion1"
    INCLUSION2 = "inclusion2"
    OUTSIDE_CELL = "outside_cell"


@dataclass(frozen=True)
class GapGeometry:
    """
    Represents the translated cell Y′ = (−L1, L1) × (−L2, L2) with D1 centred at (−L1, 0) and
    D2 centred at (L1, 0), so the gap midpoint sits at the origin.

    Attributes:
        eps (float): Distance between D1 and D2.
        L1 (float): Half width of the cell, inclusion half width + eps/2.
        L2 (float): Half height of the cell.
        shape (InclusionShape): Shape of both inclusions.
        kappa0 (float): Curvature at the closest points z1, z2.
        a (float): Offset of the reflection fixed points, √(eps(4r0+eps))/2.
        p1, p2 (tuple): Fixed points (−a, 0) and (a, 0).
        L (float): Half height of the neck region Π_L.
    """
    eps: float
    L1: float
    L2: float
    shape: InclusionShape
    kappa0: float
    a: float
    p1: tuple
    p2: tuple
    L: float

    @property
    def r0(self):
        return 1 / self.kappa0

    @property
    def A(self):
        return self.shape.A

    @property
    def B(self):
        return self.shape.B

    @property
    def z1(self):
        return (-self.eps / 2, 0.0)

    @property
    def z2(self):
        return (self.eps / 2, 0.0)

    @property
    def area(self):
        """Area of Y′: the cell minus one half of each inclusion."""
        return 4 * self.L1 * self.L2 - self.shape.area

    def f(self, y):
        y = np.asarray(y, dtype=float)
        root = np.sqrt(np.clip(1 - (y / self.B) ** 2, 0, None))
        return self.eps / 2 + self.A * (1 - root)

    def fprime(self, y):
        y = np.asarray(y, dtype=float)
        root = np.sqrt(np.clip(1 - (y / self.B) ** 2, 0, None))
        inside = root > 0
        slope = self.A * y / (self.B ** 2 * np.where(inside, root, 1))
        return np.where(inside, slope, np.copysign(np.inf, y))

    def matrix_halfwidth(self, y):
        """
        Returns X(y) such that the row of Y′ at height y is the open interval (−X, X).
        """
        y = np.asarray(y, dtype=float)
        return np.where(np.abs(y) < self.B, self.f(np.minimum(np.abs(y), self.B)), self.L1)

    def graded_levels(self):
        """
        Returns the positive heights √eps, 2√eps, 4√eps, ... below L, followed by L.
        """
        s = math.sqrt(self.eps)
        levels = []
        while s < self.L:
            levels.append(s)
            s *= 2
        levels.append(self.L)
        return levels

    def y_breakpoints(self, extra=()):
        """
        Returns the sorted heights at which quadrature grids are cut: the graded levels
        mirrored about 0, the inclusion extent ±B, the cell edges and any extra heights.
        """
        cuts = {0.0, -self.L2, self.L2}
        for level in list(self.graded_levels()) + [self.B] + [abs(e) for e in extra]:
            if 0 < level < self.L2:
                cuts.update((level, -level))
        return sorted(cuts)


def make_gap_geometry(shape, eps, L2):
    """
    Builds the gap-centred cell for the given inclusion shape and gap width.

    Raises:
        ValueError: If eps is not positive or L2 does not exceed the inclusion half height.
    """
    eps, L2 = float(eps), float(L2)
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError(f"Gap width must be positive, got eps={eps}")
    if not (L2 > shape.half_height):
        raise ValueError(f"L2={L2} must exceed the inclusion half height {shape.half_height}")
    kappa0 = shape.kappa0
    r0 = 1 / kappa0
    a = math.sqrt(eps * (4 * r0 + eps)) / 2
    geom = GapGeometry(
        eps=eps,
        L1=shape.half_width + eps / 2,
        L2=L2,
        shape=shape,
        kappa0=kappa0,
        a=a,
        p1=(-a, 0.0),
        p2=(a, 0.0),
        L=shape.half_height / 2,
    )
    logger.debug("Gap geometry eps=%g L1=%.17g L2=%g kappa0=%g a=%.17g" % (eps, geom.L1, L2, kappa0, a))
    return geom


def gap_halfwidth(g, y):
    """
    Returns f(y), the horizontal distance from x = 0 to ∂D2 at height y.
    """
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y) > g.B):
        raise ValueError(f"Height outside the inclusion extent |y| <= {g.B}")
    value = g.f(y)
    return float(value) if value.ndim == 0 else value


def gap_halfwidth_derivative(g, y):
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y) >= g.B):
        raise ValueError(f"Derivative of f needs |y| < {g.B}")
    value = g.fprime(y)
    return float(value) if value.ndim == 0 else value


def region_classify(g, p):
    """
    Classifies a point against the cell rectangle and the two inclusion interiors; boundary
    points count as matrix.
    """
    x, y = float(p[0]), float(p[1])
    if abs(x) > g.L1 or abs(y) > g.L2:
        return Region.OUTSIDE_CELL
    if abs(x) <= g.matrix_halfwidth(y):
        return Region.MATRIX
    return Region.INCLUSION2 if x > 0 else Region.INCLUSION1


def matrix_mask(g, x, y):
    """Vectorised membership test for the closed matrix region."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return (np.abs(y) <= g.L2) & (np.abs(x) <= g.matrix_halfwidth(y))


class Segment:
    """
    A smooth parametrised piece of a path.

    Attributes:
        breaks (tuple): Increasing parameter values; the first and last bound the segment and
            the inner ones are where quadrature panels must be cut.
        orientation (float): +1 when the wanted unit normal is the right-hand normal
            (v_y, −v_x)/|v| of the velocity v, −1 for the opposite normal.
    """
    def __init__(self, breaks, orientation=1.0):
        self.breaks = tuple(float(b) for b in breaks)
        self.orientation = float(orientation)

    def position(self, t):
        raise NotImplementedError

    def velocity(self, t):
        raise NotImplementedError

    def sample(self, t):
        """Returns x, y, n_x, n_y and the speed |v| at the parameters t."""
        x, y = self.position(t)
        vx, vy = self.velocity(t)
        speed = np.hypot(vx, vy)
        return x, y, self.orientation * vy / speed, -self.orientation * vx / speed, speed


class Line(Segment):
    def __init__(self, start, end, cuts=1):
        super().__init__(np.linspace(0.0, 1.0, cuts + 1))
        self.start = np.asarray(start, dtype=float)
        self.end = np.asarray(end, dtype=float)

    def position(self, t):
        t = np.asarray(t, dtype=float)
        return self.start[0] + t * (self.end[0] - self.start[0]), self.start[1] + t * (self.end[1] - self.start[1])

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        return np.full_like(t, self.end[0] - self.start[0]), np.full_like(t, self.end[1] - self.start[1])


class EllipseArc(Segment):
    """
    The arc θ ↦ (cx + A cos θ, cy + B sin θ); orientation +1 gives the normal pointing out
    of the ellipse.
    """
    def __init__(self, center, A, B, breaks, orientation=1.0):
        super().__init__(breaks, orientation)
        self.cx, self.cy = float(center[0]), float(center[1])
        self.A, self.B = float(A), float(B)

    def position(self, t):
        t = np.asarray(t, dtype=float)
        return self.cx + self.A * np.cos(t), self.cy + self.B * np.sin(t)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        return -self.A * np.sin(t), self.B * np.cos(t)


@dataclass(frozen=True)
class Curve:
    segments: tuple
    closed: bool = False

    def __iter__(self):
        return iter(self.segments)


class BoundaryCurves(NamedTuple):
    gamma_minus: Curve
    gamma_plus: Curve
    edge_top: Curve
    edge_bottom: Curve


def _arc_breaks(start, stop, near, g):
    """
    Parameter cuts of an arc of ∂D_i on [start, stop]: the ends, the angle `near` of the
    closest point and the angles where |y| equals one of the graded levels.
    """
    cuts = {start, stop}
    for level in g.graded_levels():
        if level < g.B:
            delta = math.asin(level / g.B)
            cuts.update(t for t in (near - delta, near + delta) if start < t < stop)
    if start < near < stop:
        cuts.add(near)
    quarter = math.pi / 2
    cuts.update(t for t in np.arange(math.ceil(start / quarter), math.floor(stop / quarter) + 1) * quarter if start < t < stop)
    return sorted(cuts)


def boundary_curves(g):
    """
    Returns Γ₋, Γ₊ and the horizontal cell edges of Y′ with unit normals pointing out of Y′,
    hence into the inclusions along ∂D1 and ∂D2.
    """
    B, L1, L2 = g.B, g.L1, g.L2
    plus_arc = EllipseArc((L1, 0.0), g.A, B, _arc_breaks(math.pi / 2, 3 * math.pi / 2, math.pi, g), orientation=-1.0)
    minus_arc = EllipseArc((-L1, 0.0), g.A, B, _arc_breaks(-math.pi / 2, math.pi / 2, 0.0, g), orientation=-1.0)
    gamma_plus = [plus_arc]
    gamma_minus = [minus_arc]
    if L2 > B:
        gamma_plus = [Line((L1, -L2), (L1, -B)), plus_arc, Line((L1, B), (L1, L2))]
        gamma_minus = [Line((-L1, L2), (-L1, B)), minus_arc, Line((-L1, -B), (-L1, -L2))]
    return BoundaryCurves(
        gamma_minus=Curve(tuple(gamma_minus)),
        gamma_plus=Curve(tuple(gamma_plus)),
        edge_top=Curve((Line((L1, L2), (-L1, L2), cuts=4),)),
        edge_bottom=Curve((Line((-L1, -L2), (L1, -L2), cuts=4),)),
    )


def inclusion_boundary(g, i):
    """
    Returns the whole closed boundary ∂D_i (i = 1, 2) with the normal pointing into D_i.
    """
    match i:
        case 1:
            arc = EllipseArc((-g.L1, 0.0), g.A, g.B, _arc_breaks(-math.pi, math.pi, 0.0, g), orientation=-1.0)
        case 2:
            arc = EllipseArc((g.L1, 0.0), g.A, g.B, _arc_breaks(0.0, 2 * math.pi, math.pi, g), orientation=-1.0)
        case _:
            raise ValueError(f"Inclusion index must be 1 or 2, got {i}")
    return Curve((arc,), closed=True)


def circle(center, radius, inward=False, panels=8):
    """Closed circular contour; the normal points away from the centre unless inward."""
    if not radius > 0:
        raise ValueError(f"Circle radius must be positive, got {radius}")
    arc = EllipseArc(center, radius, radius, np.linspace(0.0, 2 * math.pi, panels + 1), orientation=-1.0 if inward else 1.0)
    return Curve((arc,), closed=True)
