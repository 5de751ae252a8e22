import heapq, itertools, math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from gapstress.geometry import Curve, Segment
from gapstress.logs import loggers

logger = loggers["Quadrature"]


class QuadratureError(RuntimeError):
    """Raised on non-finite integrand values, or on budget/depth exhaustion in strict mode."""


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Tolerances and limits of one adaptive integration.

    Args:
        rel_tol (float): Target error relative to ∫|f| (largest component for vector integrands).
        abs_tol (float): Absolute error floor.
        max_depth (int): Number of successive splits after which a region is frozen.
        base_order (int): Gauss points per panel (per direction on cells); the error estimate
            compares it with a rule of base_order + base_order // 2 points.
        max_panels (int): Budget of evaluated regions.
        strict (bool): Raise QuadratureError instead of warning when the target is missed.
    """
    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_depth: int = 30
    base_order: int = 8
    max_panels: int = 200000
    strict: bool = False

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.abs_tol < 0:
            raise ValueError(f"abs_tol must be non-negative, got {self.abs_tol}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be at least 1, got {self.max_depth}")
        if self.base_order < 2:
            raise ValueError(f"base_order must be at least 2, got {self.base_order}")
        if self.max_panels < 1:
            raise ValueError(f"max_panels must be at least 1, got {self.max_panels}")

    @property
    def high_order(self):
        return self.base_order + max(2, self.base_order // 2)

    def tightened(self, factor=10.0):
        return replace(self, rel_tol=self.rel_tol / factor, abs_tol=self.abs_tol / factor)


PATH_SPEC = QuadratureSpec(rel_tol=1e-8)
CELL_SPEC = QuadratureSpec(rel_tol=1e-6)


@dataclass(frozen=True)
class IntegralResult:
    """
    Attributes:
        value (float | numpy.ndarray): The integral; an array for vector integrands.
        err_estimate (float): Estimated absolute error (largest component).
        panels_used (int): Number of panels in the final partition.
        converged (bool): Whether the tolerance was met within depth and budget.
    """
    value: object
    err_estimate: float
    panels_used: int
    converged: bool = True


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on [-1, 1], cached and read-only."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def _rows(values):
    values = np.asarray(values, dtype=float)
    return values[None, :] if values.ndim == 1 else values.reshape(values.shape[0], -1)


def _adapt(roots, evaluate, split, spec, what):
    """
    Global adaptive refinement: the region with the largest error estimate is split until
    the summed estimate meets the tolerance. Leaves are summed with math.fsum in creation
    order, so results do not depend on anything but the inputs.
    """
    leaves = {}
    heap = []
    counter = itertools.count()
    evaluated = 0
    totals = {"err": None, "abs": None}

    def add(region, depth):
        nonlocal evaluated
        value, absval, err = evaluate(region)
        evaluated += 1
        if not (np.all(np.isfinite(value)) and np.all(np.isfinite(err))):
            raise QuadratureError(f"{what}: non-finite integrand values on {region}")
        i = next(counter)
        leaves[i] = (region, depth, value, absval, err)
        if depth < spec.max_depth:
            heapq.heappush(heap, (-float(err.max()), i))
        if totals["err"] is None:
            totals["err"], totals["abs"] = err.copy(), absval.copy()
        else:
            totals["err"] += err
            totals["abs"] += absval

    def resum():
        entries = list(leaves.values())
        if entries:
            totals["err"] = np.array([math.fsum(e[4][c] for e in entries) for c in range(len(entries[0][4]))])
            totals["abs"] = np.array([math.fsum(e[3][c] for e in entries) for c in range(len(entries[0][3]))])

    for region in roots:
        add(region, 0)
    if not leaves:
        return IntegralResult(0.0, 0.0, 0, True), None

    converged = False
    reason = None
    splits = 0
    while True:
        tol = max(spec.abs_tol, spec.rel_tol * float(totals["abs"].max()))
        if float(totals["err"].max()) <= tol:
            converged = True
            break
        if not heap:
            reason = f"max_depth {spec.max_depth} reached"
            break
        if evaluated >= spec.max_panels:
            reason = f"panel budget {spec.max_panels} exhausted"
            break
        _, i = heapq.heappop(heap)
        region, depth, value, absval, err = leaves.pop(i)
        totals["err"] -= err
        totals["abs"] -= absval
        for child in split(region):
            add(child, depth + 1)
        splits += 1
        if splits % 256 == 0:
            resum()

    resum()
    order = sorted(leaves)
    k = len(leaves[order[0]][2]) if order else 1
    value = np.array([math.fsum(leaves[i][2][c] for i in order) for c in range(k)])
    err = float(totals["err"].max()) if order else 0.0
    if not converged:
        message = f"{what}: {reason}, error estimate {err:.3g} above tolerance {tol:.3g}"
        if spec.strict:
            raise QuadratureError(message)
        logger.warning(message)
    logger.debug("%s: %d panels, %d evaluated, error estimate %.3g" % (what, len(order), evaluated, err))
    return IntegralResult(value, err, len(order), converged), k


def _finish(result, scalar):
    if scalar and isinstance(result.value, np.ndarray):
        return replace(result, value=float(result.value[0]))
    return result


def _interval_estimate(fn, a, b, spec):
    half, mid = (b - a) / 2, (a + b) / 2
    lo_t, lo_w = gauss_legendre(spec.base_order)
    hi_t, hi_w = gauss_legendre(spec.high_order)
    lo = _rows(fn(mid + half * lo_t)) @ (lo_w * half)
    hi_vals = _rows(fn(mid + half * hi_t))
    hi = hi_vals @ (hi_w * half)
    return hi, np.abs(hi_vals) @ (hi_w * abs(half)), np.abs(hi - lo)


def _is_scalar(fn, sample):
    return np.asarray(fn(sample)).ndim == 1


def integrate_interval(fn, a, b, spec=PATH_SPEC, breakpoints=()):
    """
    Integrates fn over [a, b] (a > b flips the sign).

    Args:
        fn (callable): Maps an array of abscissae of shape (n,) to values of shape (n,) or (k, n).
        breakpoints (iterable): Abscissae where fn is not smooth; panels are cut there.
    """
    a, b = float(a), float(b)
    if a == b:
        return IntegralResult(0.0, 0.0, 0, True)
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    cuts = sorted({a, b} | {float(t) for t in breakpoints if a < t < b})
    roots = list(zip(cuts[:-1], cuts[1:]))
    scalar = _is_scalar(fn, np.array([(a + b) / 2]))
    result, _ = _adapt(
        roots,
        lambda r: _interval_estimate(fn, r[0], r[1], spec),
        lambda r: [(r[0], (r[0] + r[1]) / 2), ((r[0] + r[1]) / 2, r[1])],
        spec,
        f"interval [{a:g}, {b:g}]",
    )
    result = _finish(result, scalar)
    return replace(result, value=sign * result.value) if sign < 0 else result


def _segments(curve):
    if isinstance(curve, Segment):
        return [curve]
    if isinstance(curve, Curve):
        return list(curve.segments)
    return [s for c in curve for s in _segments(c)]


def integrate_path(curve, integrand, spec=PATH_SPEC):
    """
    Integrates along a curve with respect to arclength.

    Args:
        curve (Curve | Segment | list): One or several piecewise smooth curves.
        integrand (callable): ``integrand(x, y, nx, ny)`` on arrays of points with their unit
            normals; returns values of shape (n,) or (k, n).
    """
    segments = _segments(curve)

    def along(seg):
        def fn(t):
            x, y, nx, ny, speed = seg.sample(t)
            return _rows(integrand(x, y, nx, ny)) * speed
        return fn

    functions = [along(seg) for seg in segments]
    roots = [(s, t0, t1) for s, seg in enumerate(segments) for t0, t1 in zip(seg.breaks[:-1], seg.breaks[1:])]
    if not roots:
        return IntegralResult(0.0, 0.0, 0, True)
    seg0 = segments[0]
    x, y, nx, ny, _ = seg0.sample(np.array([(seg0.breaks[0] + seg0.breaks[1]) / 2]))
    scalar = np.asarray(integrand(x, y, nx, ny)).ndim == 1
    result, _ = _adapt(
        roots,
        lambda r: _interval_estimate(functions[r[0]], r[1], r[2], spec),
        lambda r: [(r[0], r[1], (r[1] + r[2]) / 2), (r[0], (r[1] + r[2]) / 2, r[2])],
        spec,
        f"path of {len(segments)} segments",
    )
    return _finish(result, scalar)


def _row_clip(cell, support, ys):
    x0, x1 = cell[0], cell[1]
    X = np.asarray(support(ys), dtype=float)
    return np.maximum(x0, -X), np.minimum(x1, X)


def _cell_rule(fn, cell, support, n):
    x0, x1, y0, y1 = cell
    t, w = gauss_legendre(n)
    hy, my = (y1 - y0) / 2, (y1 + y0) / 2
    ys = my + hy * t
    lo, hi = _row_clip(cell, support, ys)
    width = np.clip(hi - lo, 0, None)
    xs = ((lo + hi) / 2)[:, None] + (width / 2)[:, None] * t[None, :]
    Y = np.broadcast_to(ys[:, None], xs.shape)
    W = ((w * hy * width / 2)[:, None] * w[None, :]).ravel()
    vals = _rows(fn(xs.ravel(), Y.ravel()))
    return vals @ W, np.abs(vals) @ W


def _cell_estimate(fn, cell, support, spec):
    lo, _ = _cell_rule(fn, cell, support, spec.base_order)
    hi, absval = _cell_rule(fn, cell, support, spec.high_order)
    return hi, absval, np.abs(hi - lo)


def _prepare(cell, support):
    """
    Cuts a cell at the heights where the row boundary ±X(y) crosses its vertical edges, so
    that the clipped rows vary smoothly, and drops the pieces with empty rows.
    """
    x0, x1, y0, y1 = cell
    cuts = {y0, y1}
    for c in {abs(x0), abs(x1)}:
        if c == 0:
            continue
        g = lambda y: float(support(y)) - c
        ga, gb = g(y0), g(y1)
        if ga * gb < 0:
            cuts.add(brentq(g, y0, y1, xtol=1e-15))
    cuts = sorted(cuts)
    pieces = []
    for ya, yb in zip(cuts[:-1], cuts[1:]):
        if yb <= ya:
            continue
        lo, hi = _row_clip(cell, support, np.array([(ya + yb) / 2]))
        if hi[0] > lo[0]:
            pieces.append((x0, x1, ya, yb))
    return pieces


def _split_cell(cell, support):
    x0, x1, y0, y1 = cell
    Xm = float(max(support(y0), support(y1)))
    lo, hi = max(x0, -Xm), min(x1, Xm)
    if hi - lo > y1 - y0:
        xm = (lo + hi) / 2
        halves = [(x0, xm, y0, y1), (xm, x1, y0, y1)]
    else:
        ym = (y0 + y1) / 2
        halves = [(x0, x1, y0, ym), (x0, x1, ym, y1)]
    return [piece for half in halves for piece in _prepare(half, support)]


def integrate_cell(geom, integrand, spec=CELL_SPEC, support=None, breaks_y=()):
    """
    Integrates over the matrix part Y′ of the cell.

    Every row of Y′ is an interval (−X(y), X(y)), so cells are clipped exactly row by row.
    The initial grid is graded towards the gap at heights ±√eps, ±2√eps, ..., ±L.

    Args:
        integrand (callable): ``integrand(x, y)`` on flat arrays; returns (n,) or (k, n).
        support (callable): Row half-width to integrate over instead of X(y); must be even,
            nondecreasing in |y| and at most X(y).
        breaks_y (iterable): Extra heights where the integrand or support is not smooth.
    """
    support = support or geom.matrix_halfwidth
    xs = [-geom.L1, -geom.L1 / 2, 0.0, geom.L1 / 2, geom.L1]
    ys = geom.y_breakpoints(extra=breaks_y)
    roots = [piece for y0, y1 in zip(ys[:-1], ys[1:]) for x0, x1 in zip(xs[:-1], xs[1:]) for piece in _prepare((x0, x1, y0, y1), support)]
    scalar = np.asarray(integrand(np.array([0.0]), np.array([0.0]))).ndim == 1
    result, _ = _adapt(
        roots,
        lambda c: _cell_estimate(integrand, c, support, spec),
        lambda c: _split_cell(c, support),
        spec,
        f"cell eps={geom.eps:g}",
    )
    return _finish(result, scalar)
