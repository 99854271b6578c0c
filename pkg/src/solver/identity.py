"""
Divergence Identity

This module checks the integrated scalar curvature identity between a
geometry g and a Ricci-flat reference g_o sharing its rod data. With

    X = -2 grad(alpha - alpha_o + Z) + (2 alpha - 2 alpha_o - Z) grad log rho
        - (V - V_o) grad V_o - (W - W_o) grad W_o

the flat divergence of X equals the reduced energy density plus
e^{2 alpha} R + 3/2 |grad Z|^2 + 1/2 e^{-2 alpha} G_ij F^i F^j. Both sides
are integrated over Omega (rho > sigma1, corner disks of radius
sigma2^2 / 2 removed, inside the outer radius) with Gauss rules: the bulk
in (z, log rho) and the flux on the axis line, the corner arcs and the
outer arc.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple

import numpy as np

from src.exceptions import ClassMismatchError, DomainError
from src.geometry.curvature import sample, scalar_curvature
from src.geometry.reduction import reduce_torus_matrix
from src.solver.energy import Margins
from src.utils.numerics import Derivatives2D, composite_gauss, derivatives_2d, gauss_legendre

logger = logging.getLogger(__name__)

STEP_FRACTION = 1e-2
INNER_PANELS = 12
ARC_PANELS = 8

_ALPHA, _Z, _V, _W, _ALPHA_O, _V_O, _W_O, _A1R, _A1Z, _A2R, _A2Z = range(11)


@dataclass
class BalanceReport:
    """Boundary fluxes of X against the bulk terms of the identity"""
    axis: float
    corners: float
    infinity: float
    boundary: float
    reduced_energy: float
    curvature: float
    z_term: float
    field_term: float
    bulk: float
    imbalance: float
    relative: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def _rods_of(sampler):
    if hasattr(sampler, 'rod_data'):
        return sampler.rod_data()
    return sampler.family.rod_data()


def _stacked(g, g_o, beta_ell: float):
    def fields(rho, z):
        s = sample(g, rho, z)
        s_o = sample(g_o, rho, z)
        reduced, p = reduce_torus_matrix(s.G, s.rho, beta_ell)
        _, p_o = reduce_torus_matrix(s_o.G, s_o.rho, beta_ell)
        return np.stack([
            s.alpha, reduced.Z, p.V, p.W, s_o.alpha, p_o.V, p_o.W,
            s.A[..., 0, 0], s.A[..., 0, 1], s.A[..., 1, 0], s.A[..., 1, 1],
        ], axis=-1)
    return fields


class IdentityIntegrand:
    """X and the bulk densities of one pair of geometries"""

    def __init__(self, g, g_o):
        self.g = g
        self.g_o = g_o
        self.fields = _stacked(g, g_o, g_o.asymptotic_class().beta_ell)

    def derivatives(self, rho, z) -> Derivatives2D:
        return derivatives_2d(self.fields, rho, z, STEP_FRACTION * np.asarray(rho), order=4)

    def flux(self, rho, z) -> Tuple[np.ndarray, np.ndarray]:
        """(X_rho, X_z)"""
        D = self.derivatives(rho, z)
        f, fr, fz = D.value, D.d_rho, D.d_z
        d_alpha = f[..., _ALPHA] - f[..., _ALPHA_O]
        dV = f[..., _V] - f[..., _V_O]
        dW = f[..., _W] - f[..., _W_O]
        x_rho = (-2 * (fr[..., _ALPHA] - fr[..., _ALPHA_O] + fr[..., _Z])
                 + (2 * d_alpha - f[..., _Z]) / rho
                 - dV * fr[..., _V_O] - dW * fr[..., _W_O])
        x_z = (-2 * (fz[..., _ALPHA] - fz[..., _ALPHA_O] + fz[..., _Z])
               - dV * fz[..., _V_O] - dW * fz[..., _W_O])
        return x_rho, x_z

    def densities(self, rho, z) -> Dict[str, np.ndarray]:
        """Reduced energy, curvature, Z and field strength densities"""
        D = self.derivatives(rho, z)
        f, fr, fz = D.value, D.d_rho, D.d_z

        def grad2(i):
            return fr[..., i] ** 2 + fz[..., i] ** 2

        def laplacian(i):
            return D.d_rho_rho[..., i] + fr[..., i] / rho + D.d_zz[..., i]

        dV = f[..., _V] - f[..., _V_O]
        dW = f[..., _W] - f[..., _W_O]
        grad_dV2 = (fr[..., _V] - fr[..., _V_O]) ** 2 + (fz[..., _V] - fz[..., _V_O]) ** 2
        grad_dW2 = (fr[..., _W] - fr[..., _W_O]) ** 2 + (fz[..., _W] - fz[..., _W_O]) ** 2
        reduced = (0.5 * (np.sinh(f[..., _W]) ** 2 * grad2(_V) - np.sinh(f[..., _W_O]) ** 2 * grad2(_V_O)
                          + grad_dV2 + grad_dW2)
                   - dV * laplacian(_V_O) - dW * laplacian(_W_O))

        alpha = f[..., _ALPHA]
        curvature = np.exp(2 * alpha) * scalar_curvature(self.g, rho, z, STEP_FRACTION * rho, order=4)

        G = sample(self.g, rho, z).G
        f1 = fr[..., _A1Z] - fz[..., _A1R]
        f2 = fr[..., _A2Z] - fz[..., _A2R]
        gff = G[..., 0, 0] * f1 ** 2 + 2 * G[..., 0, 1] * f1 * f2 + G[..., 1, 1] * f2 ** 2

        return {
            'reduced_energy': reduced,
            'curvature': curvature,
            'z_term': 1.5 * grad2(_Z),
            'field_term': 0.5 * np.exp(-2 * alpha) * gff,
        }


def _z_breakpoints(corners: List[float], eps: float, shadow: float, z_end: float, outer: float) -> np.ndarray:
    points = {-z_end, z_end}
    for zc in corners:
        for c in (0.0, shadow, eps, 1.5 * eps, 2 * eps, 3 * eps, 5 * eps, 8 * eps):
            points.update((zc - c, zc + c))
    for q in (1e-4, 1e-3, 1e-2, 0.05, 0.15):
        points.update((z_end - q * outer, -z_end + q * outer))
    pts = np.array(sorted(p for p in points if -z_end <= p <= z_end))
    pts = pts[np.concatenate([[True], np.diff(pts) > 1e-12 * outer])]

    # split long panels
    max_panel = max(0.25, outer / 40)
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        n = int(np.ceil((b - a) / max_panel))
        out.extend(np.linspace(a, b, n + 1)[1:])
    return np.array(out)


def _arc_rule(phi_lo: float, phi_hi: float, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    span = phi_hi - phi_lo
    edges = [phi_lo + span * t for t in (0.0, 0.01, 0.05, 0.15)]
    edges += list(np.linspace(phi_lo + 0.15 * span, phi_hi - 0.15 * span, ARC_PANELS + 1)[1:-1])
    edges += [phi_hi - span * t for t in (0.15, 0.05, 0.01, 0.0)]
    return composite_gauss(edges, nodes)


def _z_rule(z_edges: np.ndarray, corners: List[float], eps: float, s1: float, shadow: float,
            nodes: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gauss rule in z for the bulk, with the lower rho limit at each node

    Over a corner's shadow the rule runs in the angle psi on the corner
    circle, z = zc - eps cos psi, where rho_lo = eps sin psi is analytic.

    Returns:
        tuple: (z nodes, weights, rho_lo)
    """
    spans = [(zc - shadow, zc + shadow) for zc in corners] if shadow > 0 else []
    z_parts, w_parts, lo_parts = [], [], []
    for a, b in zip(z_edges[:-1], z_edges[1:]):
        mid = 0.5 * (a + b)
        if b <= a or any(lo <= mid <= hi for lo, hi in spans):
            continue
        x, w = gauss_legendre(nodes, a, b)
        z_parts.append(x)
        w_parts.append(w)
        lo_parts.append(np.full_like(x, s1))
    if spans:
        psi0 = np.arcsin(s1 / eps)
        psi, wpsi = _arc_rule(psi0, np.pi - psi0, nodes)
        for zc in corners:
            z_parts.append(zc - eps * np.cos(psi))
            w_parts.append(wpsi * eps * np.sin(psi))
            lo_parts.append(eps * np.sin(psi))
    order = np.argsort(np.concatenate(z_parts))
    return tuple(np.concatenate(parts)[order] for parts in (z_parts, w_parts, lo_parts))


def divergence_identity_check(g, g_o, margins: Margins, nodes: int = 8) -> BalanceReport:
    """
    Compare the boundary flux of X with the bulk terms over Omega

    Args:
        g: Geometry (family or sampler with sample_brill) with g_o's rod data
        g_o: Ricci-flat reference family
        margins: sigma1, sigma2 and the outer radius of Omega
        nodes: Gauss nodes per panel

    Returns:
        BalanceReport: Fluxes, bulk terms and their relative imbalance
    """
    rods = g_o.rod_data()
    if not _rods_of(g).same_rods(rods, tol=1e-9):
        raise ClassMismatchError(f"Geometries have different rods: {_rods_of(g)} vs {rods}")

    s1, eps, outer = margins.sigma1, 0.5 * margins.sigma2 ** 2, margins.outer_radius
    corners = [float(c) for c in rods.turning_points]
    if corners and (max(abs(c) for c in corners) + eps >= outer):
        raise DomainError(f"Outer radius {outer:g} does not enclose the corner disks")
    if len(corners) > 1 and np.min(np.diff(corners)) <= 2 * eps:
        raise DomainError(f"Corner disks of radius {eps:g} overlap")
    if outer <= s1:
        raise DomainError("Outer radius must exceed sigma1")
    arcs = eps > s1
    shadow = np.sqrt(eps ** 2 - s1 ** 2) if arcs else 0.0
    z_end = np.sqrt(outer ** 2 - s1 ** 2)

    integrand = IdentityIntegrand(g, g_o)
    z_edges = _z_breakpoints(corners, eps, shadow, z_end, outer)

    # bulk in (z, s = log rho)
    zq, wz, rho_lo = _z_rule(z_edges, corners, eps, s1, shadow, nodes)
    s_lo = np.log(rho_lo)
    s_hi = 0.5 * np.log(outer ** 2 - zq ** 2)
    t, wt = composite_gauss(np.linspace(0.0, 1.0, INNER_PANELS + 1), nodes)
    span = (s_hi - s_lo)[:, None]
    rho = np.exp(s_lo[:, None] + span * t[None, :])
    z = np.broadcast_to(zq[:, None], rho.shape)
    weights = 2 * np.pi * rho ** 2 * span * wz[:, None] * wt[None, :]
    bulk_terms = {k: float(np.sum(weights * v)) for k, v in integrand.densities(rho, z).items()}

    # axis line rho = sigma1, outward normal -e_rho
    za, wa = composite_gauss(z_edges, nodes)
    keep = np.ones_like(za, dtype=bool)
    for zc in corners:
        keep &= np.abs(za - zc) >= shadow
    x_rho, _ = integrand.flux(np.full(keep.sum(), s1), za[keep])
    axis = float(np.sum(wa[keep] * -x_rho) * 2 * np.pi * s1)

    # corner arcs, normal pointing into the removed disk
    corner_flux = 0.0
    if arcs:
        phi, wphi = _arc_rule(np.arcsin(s1 / eps), np.pi - np.arcsin(s1 / eps), nodes)
        for zc in corners:
            r_arc = eps * np.sin(phi)
            x_rho, x_z = integrand.flux(r_arc, zc + eps * np.cos(phi))
            normal = -(x_rho * np.sin(phi) + x_z * np.cos(phi))
            corner_flux += float(np.sum(wphi * normal * 2 * np.pi * r_arc * eps))

    # outer arc
    phi, wphi = _arc_rule(np.arcsin(s1 / outer), np.pi - np.arcsin(s1 / outer), nodes)
    r_arc = outer * np.sin(phi)
    x_rho, x_z = integrand.flux(r_arc, outer * np.cos(phi))
    infinity = float(np.sum(wphi * (x_rho * np.sin(phi) + x_z * np.cos(phi)) * 2 * np.pi * r_arc * outer))

    boundary = axis + corner_flux + infinity
    bulk = sum(bulk_terms.values())
    imbalance = boundary - bulk
    scale = max(abs(boundary), abs(bulk))
    relative = abs(imbalance) / scale if scale > 0 else 0.0
    logger.info(f"Divergence identity: boundary {boundary:.10g}, bulk {bulk:.10g}, relative imbalance {relative:.3e}")
    return BalanceReport(axis=axis, corners=corner_flux, infinity=infinity, boundary=boundary,
                         reduced_energy=bulk_terms['reduced_energy'], curvature=bulk_terms['curvature'],
                         z_term=bulk_terms['z_term'], field_term=bulk_terms['field_term'],
                         bulk=bulk, imbalance=imbalance, relative=relative)
