import math

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from gapstress.bounds.results import BoundKind, BoundResult, m_constant, unit_loading
from gapstress.elasticity import Matrix2, compliance_product
from gapstress.geometry import boundary_curves, matrix_mask
from gapstress.kernels import KernelContext, singular_stress, stress_divergence
from gapstress.logs import loggers
from gapstress.quadrature import CELL_SPEC, PATH_SPEC, integrate_cell, integrate_interval, integrate_path

logger = loggers["Bounds"]


class StressField:
    """
    Represents a stress field p ↦ tensor on points of shape (2, ...).

    Args:
        evaluate (callable): Returns a SymTensor2 or Matrix2 with array components.
        name (str): Label used in logs and reports.
        divergence_free (bool): Whether the field is meant to satisfy ∇·σ = 0.
    """
    def __init__(self, evaluate, name, divergence_free=True):
        self.evaluate = evaluate
        self.name = name
        self.divergence_free = divergence_free

    def __call__(self, p):
        return self.evaluate(np.asarray(p, dtype=float))

    def divergence(self, p, h):
        return stress_divergence(self, p, h)

    def __repr__(self):
        return f"<StressField {self.name}>"


class DualStress:
    """
    The admissible stress σ_j = σ_j^S + σ_j^c of the dual principle.

    σ_j^S = (m_j/√eps) ℂ∇̂q_j is divergence free but loads the edges y = ±L2. The correction
    σ_j^c has columns G_j(x) and F_j(x, y) with

        G_j(x)    = ∫_0^x t_j(x′) dx′,   t_j = [σ_j^S(·, L2) − σ_j^S(·, −L2)] e2 / (2L2)
        F_j(x, y) = −σ_j^S(x, −L2) e2 − (y + L2) t_j(x)

    so that ∂_1G_j + ∂_2F_j = 0 and σ_j^c e2 = −σ_j^S e2 on both edges.

    Args:
        geom (GapGeometry): The cell.
        material (LameMaterial): The matrix material.
        j (int): Loading index.
        spec (QuadratureSpec): Tolerances of the G_j tabulation.
        nodes (int): Tabulation nodes on each side of x = 0.

    Attributes:
        m (float): m_j.
        G_cache (CubicHermiteSpline): Tabulated G_j with exact end slopes t_j.
        tabulation_err (float): Summed quadrature error of the tabulation.
        interp_residual (float): Largest interpolation error of G_j found at panel midpoints.
    """
    def __init__(self, geom, material, j, spec=PATH_SPEC, nodes=128):
        unit_loading(j)
        self.geom = geom
        self.material = material
        self.j = j
        self.ctx = KernelContext.from_geometry(geom, material)
        self.m = m_constant(material, geom.kappa0, j)
        self.scale = self.m / math.sqrt(geom.eps)
        self.sigma_S = StressField(lambda p: singular_stress(self.ctx, self.j, p) * self.scale, f"sigma{j}_S")
        self.sigma_c = StressField(self._sigma_c, f"sigma{j}_c")
        self.sigma_total = StressField(lambda p: self.sigma_S(p).to_matrix() + self._sigma_c(p), f"sigma{j}")
        self._tabulate(spec, nodes)

    def edge_traction(self, x, side):
        """σ_j^S e2 on the edge y = side·L2, shape (2, ...)."""
        x = np.asarray(x, dtype=float)
        p = np.stack([x, np.full_like(x, side * self.geom.L2)])
        return np.array(self.sigma_S(p).traction(0.0, 1.0))

    def edge_jump(self, x):
        return (self.edge_traction(x, 1) - self.edge_traction(x, -1)) / (2 * self.geom.L2)

    def _tabulate(self, spec, nodes):
        xs = np.linspace(-self.geom.L1, self.geom.L1, 2 * nodes + 1)
        xs[nodes] = 0.0
        pieces = {}
        for k in range(nodes, 2 * nodes):
            pieces[k + 1] = integrate_interval(self.edge_jump, xs[k], xs[k + 1], spec)
        for k in range(nodes, 0, -1):
            pieces[k - 1] = integrate_interval(self.edge_jump, xs[k], xs[k - 1], spec)
        values = np.zeros((2, len(xs)))
        for k in range(len(xs)):
            path = range(nodes + 1, k + 1) if k > nodes else range(nodes - 1, k - 1, -1)
            values[:, k] = [math.fsum(pieces[i].value[c] for i in path) for c in (0, 1)]
        self.tabulation_err = math.fsum(r.err_estimate for r in pieces.values())
        self.G_cache = CubicHermiteSpline(xs, values, self.edge_jump(xs), axis=1)
        self.nodes = xs

        mids = (xs[:-1] + xs[1:]) / 2
        residual = 0.0
        for k, mid in enumerate(mids):
            exact = values[:, k] + integrate_interval(self.edge_jump, xs[k], mid, spec).value
            residual = max(residual, float(np.abs(self.G(mid) - exact).max()))
        self.interp_residual = residual
        logger.debug("Tabulated G%d on %d nodes, interpolation residual %.3g" % (self.j, len(xs), residual))

    def G(self, x):
        return self.G_cache(np.asarray(x, dtype=float))

    def F(self, p):
        x, y = np.asarray(p[0], dtype=float), np.asarray(p[1], dtype=float)
        top, bottom = self.edge_traction(x, 1), self.edge_traction(x, -1)
        return -bottom - (y + self.geom.L2) * (top - bottom) / (2 * self.geom.L2)

    def _sigma_c(self, p):
        G, F = self.G(p[0]), self.F(p)
        return Matrix2(G[0], F[0], G[1], F[1])

    def sample_points(self, count, seed=0):
        """Uniform random points of the matrix region, reproducible for a given seed."""
        rng = np.random.default_rng(seed)
        g = self.geom
        found = []
        total = 0
        while total < count:
            batch = rng.uniform((-g.L1, -g.L2), (g.L1, g.L2), size=(max(count, 64), 2)).T
            batch = batch[:, matrix_mask(g, batch[0], batch[1])]
            found.append(batch)
            total += batch.shape[1]
        return np.concatenate(found, axis=1)[:, :count]

    def diagnostics(self, points=1000, edge_points=100, seed=0):
        """
        Returns the structural residuals of σ_j:

            div_residual     max |∇·σ_j| · d / (|σ^S| + |σ^c|), d the distance to the nearest pole
            div_residual_c   max |∇·σ^c| · L1 / max |σ^c|
            bc_residual      max |σ_j e2| on y = ±L2 relative to max |σ^S e2| there
            asymmetry_max    max |σ^c_12 − σ^c_21|
            sigma_c_max      max |σ^c|
            interp_residual  largest G_j interpolation error found
        """
        g = self.geom
        P = self.sample_points(points, seed)
        d = np.minimum(np.hypot(P[0] - g.p1[0], P[1]), np.hypot(P[0] - g.p2[0], P[1]))
        S, C = self.sigma_S(P), self._sigma_c(P)
        local = S.norm() + C.norm()
        div = self.sigma_total.divergence(P, 1e-4 * d)
        div_residual = float((np.hypot(div[0], div[1]) * d / local).max())

        xe = np.linspace(-g.L1, g.L1, edge_points)
        edges = np.concatenate([np.stack([xe, np.full_like(xe, g.L2)]), np.stack([xe, np.full_like(xe, -g.L2)])], axis=1)
        Ce = self._sigma_c(edges)
        c_max = float(max(C.norm().max(), Ce.norm().max()))
        div_c = self.sigma_c.divergence(P, 1e-4 * g.L1)
        div_residual_c = float(np.hypot(div_c[0], div_c[1]).max() * g.L1 / c_max) if c_max > 0 else 0.0

        total = self.sigma_total(edges)
        bc = np.hypot(total.g12, total.g22)
        load = np.hypot(*self.sigma_S(edges).traction(0.0, 1.0))
        bc_residual = float(bc.max() / load.max()) if load.max() > 0 else float(bc.max())
        asymmetry = float(max(np.abs(C.g12 - C.g21).max(), np.abs(Ce.g12 - Ce.g21).max()))
        return {
            "div_residual": div_residual,
            "div_residual_c": div_residual_c,
            "bc_residual": bc_residual,
            "asymmetry_max": asymmetry,
            "sigma_c_max": c_max,
            "interp_residual": self.interp_residual,
        }


def build_dual_stress(geom, material, j, spec=PATH_SPEC):
    """
    Builds σ_j and tabulates G_j.

    Raises:
        QuadratureError: When the tabulation fails.
    """
    return DualStress(geom, material, j, spec)


def dual_lower(geom, material, j, spec=CELL_SPEC, path_spec=PATH_SPEC, dual=None, points=1000, seed=0):
    """
    Evaluates the dual functional −∫_{Y′} σ:ℂ⁻¹σ + 2∫_{Γ₊} σn·Ψ_j on σ = σ_j, a lower bound
    of ℰ_j.

    The terms are reported as ``I`` (σ^S alone), ``II`` (σ^c alone) and ``cross``
    (−2∫σ^S:ℂ⁻¹σ^c); their sum is the value.
    """
    dual = dual or build_dual_stress(geom, material, j, path_spec)
    psi = unit_loading(j)

    def volume(x, y):
        p = np.stack([x, y])
        S, C = dual.sigma_S(p), dual.sigma_c(p)
        return np.stack([compliance_product(S, S, material), compliance_product(C, C, material), compliance_product(S, C, material)])

    def boundary(x, y, nx, ny):
        p = np.stack([x, y])
        tS = np.array(dual.sigma_S(p).traction(nx, ny))
        tC = np.array(dual.sigma_c(p).traction(nx, ny))
        return np.stack([psi @ tS, psi @ tC])

    vol = integrate_cell(geom, volume, spec)
    path = integrate_path(boundary_curves(geom).gamma_plus, boundary, path_spec)
    SS, cc, Sc = (float(v) for v in vol.value)
    bS, bc = (float(v) for v in path.value)
    terms = {
        "I": math.fsum((-SS, 2 * bS)),
        "II": math.fsum((-cc, 2 * bc)),
        "cross": -2 * Sc,
    }
    value = math.fsum((-SS, -cc, -2 * Sc, 2 * bS, 2 * bc))
    err = 4 * vol.err_estimate + 4 * path.err_estimate + 2 * dual.tabulation_err
    logger.info("Lower bound j=%d eps=%g: %.17g (error %.3g)" % (j, geom.eps, value, err))
    return BoundResult(
        j=j,
        kind=BoundKind.LOWER,
        value=value,
        quadrature_err=err,
        diagnostics=dual.diagnostics(points=points, seed=seed),
        terms=terms,
        converged=vol.converged and path.converged,
        eps=geom.eps,
    )
