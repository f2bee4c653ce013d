"""Discrete differential operators, bilinear forms and norms.

The gradient lives on diamonds, the divergence maps diamond vector fields
back to cell/dual values, and the two are adjoint up to boundary terms (the
discrete Green formula).  Inner products of two discrete gradients reduce to
per-diamond 2x2 quadratic forms in the diagonal differences
(u_cell_k - u_cell_l, u_vert_k - u_vert_l); ``local_matrices`` builds the
corresponding matrices from the anisotropy tensor.
"""

import numpy as np

from .errors import BadBeta, ValidationError
from .fields import DiscreteField, TensorSpec


def _diamond_values(mesh, u: DiscreteField):
    """Corner values (k-cell, l-cell, k-vertex, l-vertex) per diamond."""
    primal = u.primal_all
    dual = u.dual
    return (
        primal[mesh.dia_cell_k],
        primal[mesh.dia_cell_l],
        dual[mesh.dia_vert_k],
        dual[mesh.dia_vert_l],
    )


def delta_diamond(mesh, u: DiscreteField):
    """Diagonal differences (nd, 2): (u_cell_k - u_cell_l, u_vert_k - u_vert_l)."""
    uk, ul, uvk, uvl = _diamond_values(mesh, u)
    return np.column_stack([uk - ul, uvk - uvl])


def grad_diamond(mesh, u: DiscreteField) -> np.ndarray:
    """Diamond-constant gradient, exact for fields sampled from affine data."""
    uk, ul, uvk, uvl = _diamond_values(mesh, u)
    num = (
        (mesh.edge_len * (ul - uk))[:, None] * mesh.edge_normal
        + (mesh.dual_edge_len * (uvl - uvk))[:, None] * mesh.dual_edge_normal
    )
    return num / (2.0 * mesh.diamond_area)[:, None]


def div_discrete(mesh, xi: np.ndarray) -> DiscreteField:
    """Discrete divergence of a diamond vector field.

    Interior-cell and dual-cell components sum the edge fluxes of the
    incident diamonds; the boundary-cell component is zero by convention.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (mesh.n_diamonds, 2):
        raise ValidationError("diamond field must have shape (n_diamonds, 2)")
    flux_edge = mesh.edge_len * np.einsum("ij,ij->i", xi, mesh.edge_normal)
    flux_dual = mesh.dual_edge_len * np.einsum("ij,ij->i", xi, mesh.dual_edge_normal)

    interior = np.zeros(mesh.n_cells)
    np.add.at(interior, mesh.dia_cell_k, flux_edge)
    inner = ~mesh.dia_is_boundary
    np.subtract.at(interior, mesh.dia_cell_l[inner], flux_edge[inner])
    interior /= mesh.cell_areas

    dual = np.zeros(mesh.n_verts)
    np.add.at(dual, mesh.dia_vert_k, flux_dual)
    np.subtract.at(dual, mesh.dia_vert_l, flux_dual)
    dual /= mesh.dual_areas

    return DiscreteField.from_components(
        mesh, interior, np.zeros(mesh.n_bnd), dual
    )


def bracket(mesh, u: DiscreteField, v: DiscreteField) -> float:
    """Half primal plus half dual mass-weighted product.

    Boundary cells carry no measure and do not contribute, so this is only
    positive semi-definite on the full set of values.
    """
    return 0.5 * (
        float(np.dot(mesh.cell_areas, u.interior * v.interior))
        + float(np.dot(mesh.dual_areas, u.dual * v.dual))
    )


def _lam_on_diamonds(mesh, lam):
    if isinstance(lam, TensorSpec):
        return lam.on_diamonds(mesh)
    lam = np.asarray(lam, dtype=float)
    if lam.shape == (2, 2):
        return np.broadcast_to(lam, (mesh.n_diamonds, 2, 2))
    if lam.shape != (mesh.n_diamonds, 2, 2):
        raise ValidationError("tensor field must have shape (n_diamonds, 2, 2)")
    return lam


def inner_lambda(mesh, lam, xi: np.ndarray, phi: np.ndarray) -> float:
    """Tensor-weighted inner product of two diamond vector fields."""
    lam_d = _lam_on_diamonds(mesh, lam)
    lam_phi = np.einsum("dij,dj->di", lam_d, np.asarray(phi, dtype=float))
    return float(np.dot(mesh.diamond_area,
                        np.einsum("di,di->d", np.asarray(xi, dtype=float), lam_phi)))


class LocalMatrices:
    """Per-diamond 2x2 matrices of the gradient quadratic form.

    a_* are the entries of the symmetric matrix (so that the tensor-weighted
    inner product of two gradients is the sum over diamonds of
    delta_u . A delta_v); b_edge/b_dual are the entries of its diagonal
    domination used in dissipation diagnostics.
    """

    __slots__ = ("a_edge", "a_cross", "a_dual", "b_edge", "b_dual")

    def __init__(self, a_edge, a_cross, a_dual):
        self.a_edge = a_edge
        self.a_cross = a_cross
        self.a_dual = a_dual
        self.b_edge = np.abs(a_edge) + np.abs(a_cross)
        self.b_dual = np.abs(a_dual) + np.abs(a_cross)

    def matrix(self, d):
        return np.array([
            [self.a_edge[d], self.a_cross[d]],
            [self.a_cross[d], self.a_dual[d]],
        ])

    def quad_a(self, w1, w2):
        """Quadratic form w . A w per diamond."""
        return self.a_edge * w1 * w1 + 2.0 * self.a_cross * w1 * w2 + self.a_dual * w2 * w2

    def bilin_a(self, u1, u2, v1, v2):
        return (self.a_edge * u1 * v1 + self.a_dual * u2 * v2
                + self.a_cross * (u1 * v2 + u2 * v1))

    def quad_b(self, w1, w2):
        return self.b_edge * w1 * w1 + self.b_dual * w2 * w2

    def cond2(self):
        """2-norm condition number per diamond (eigenvalue ratio)."""
        tr = self.a_edge + self.a_dual
        det = self.a_edge * self.a_dual - self.a_cross**2
        disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
        return (tr + disc) / (tr - disc)


def local_matrices(mesh, lam) -> LocalMatrices:
    """Assemble the per-diamond gradient-form matrices for a tensor."""
    lam_d = _lam_on_diamonds(mesh, lam)
    ne, nd = mesh.edge_normal, mesh.dual_edge_normal
    lam_ne = np.einsum("dij,dj->di", lam_d, ne)
    lam_nd = np.einsum("dij,dj->di", lam_d, nd)
    scale = 1.0 / (4.0 * mesh.diamond_area)
    a_edge = scale * mesh.edge_len**2 * np.einsum("di,di->d", lam_ne, ne)
    a_cross = scale * mesh.edge_len * mesh.dual_edge_len * np.einsum(
        "di,di->d", lam_ne, nd
    )
    a_dual = scale * mesh.dual_edge_len**2 * np.einsum("di,di->d", lam_nd, nd)
    return LocalMatrices(a_edge, a_cross, a_dual)


def reconstruct_diamond(mesh, u: DiscreteField) -> np.ndarray:
    """Arithmetic mean of the four corner values per diamond."""
    uk, ul, uvk, uvl = _diamond_values(mesh, u)
    return 0.25 * (uk + ul + uvk + uvl)


# --- penalization ------------------------------------------------------


def _check_beta(beta):
    if not 0.0 < beta < 2.0:
        raise BadBeta(f"penalization exponent {beta!r} outside (0, 2)")


def penalize(mesh, u: DiscreteField, beta: float) -> DiscreteField:
    """Primal/dual gap operator scaled by h**(-beta); zero on boundary cells."""
    _check_beta(beta)
    gap = u.interior[mesh.overlap_cell] - u.dual[mesh.overlap_vert]
    weighted = mesh.overlap_area * gap
    interior = np.zeros(mesh.n_cells)
    np.add.at(interior, mesh.overlap_cell, weighted)
    interior /= mesh.cell_areas
    dual = np.zeros(mesh.n_verts)
    np.subtract.at(dual, mesh.overlap_vert, weighted)
    dual /= mesh.dual_areas
    scale = 1.0 / mesh.h**beta
    return DiscreteField.from_components(
        mesh, scale * interior, np.zeros(mesh.n_bnd), scale * dual
    )


def penalization_bracket(mesh, u: DiscreteField, v: DiscreteField,
                         beta: float) -> float:
    """Symmetric positive form: overlap-weighted primal/dual gap product."""
    _check_beta(beta)
    gap_u = u.interior[mesh.overlap_cell] - u.dual[mesh.overlap_vert]
    gap_v = v.interior[mesh.overlap_cell] - v.dual[mesh.overlap_vert]
    return float(np.dot(mesh.overlap_area, gap_u * gap_v)) / (2.0 * mesh.h**beta)


# --- norms -------------------------------------------------------------


def lp_norm(mesh, u: DiscreteField, p) -> float:
    """Mass-weighted l^p norm over interior and dual values."""
    if p == np.inf:
        return float(max(np.abs(u.interior).max(), np.abs(u.dual).max()))
    if p < 1:
        raise ValidationError("p must be >= 1")
    total = 0.5 * (
        float(np.dot(mesh.cell_areas, np.abs(u.interior) ** p))
        + float(np.dot(mesh.dual_areas, np.abs(u.dual) ** p))
    )
    return total ** (1.0 / p)


def grad_lp_norm(mesh, u: DiscreteField, p) -> float:
    g = np.hypot(*grad_diamond(mesh, u).T)
    if p == np.inf:
        return float(g.max())
    return float(np.dot(mesh.diamond_area, g**p)) ** (1.0 / p)


def w1p_norm(mesh, u: DiscreteField, p) -> float:
    if p == np.inf:
        return lp_norm(mesh, u, p) + grad_lp_norm(mesh, u, p)
    return (lp_norm(mesh, u, p) ** p + grad_lp_norm(mesh, u, p) ** p) ** (1.0 / p)


def w1inf_star_norm(mesh, u: DiscreteField, beta: float = 1.0) -> float:
    """W^{1,inf}-type norm plus the square root of the penalization form."""
    return w1p_norm(mesh, u, np.inf) + penalization_bracket(mesh, u, u, beta) ** 0.5


def time_lq_norm(values, dt: float, q) -> float:
    """l^q-in-time composite of per-step norms (step n covers (t_{n-1}, t_n])."""
    values = np.asarray(values, dtype=float)
    if q == np.inf:
        return float(values.max())
    return float(dt * np.sum(values**q)) ** (1.0 / q)


def norm_family(mesh, u: DiscreteField, p, beta: float = 1.0) -> dict:
    """The standard norms of one field, keyed by name."""
    return {
        "lp": lp_norm(mesh, u, p),
        "w1p": w1p_norm(mesh, u, p),
        "w1inf_star": w1inf_star_norm(mesh, u, beta),
    }


def trace_boundary(mesh, u: DiscreteField):
    """Boundary-cell values as the trace on the domain boundary.

    Returns (values, norm) where norm**2 sums edge_length * value**2 over
    the boundary edges.
    """
    vals = u.boundary
    norm = float(np.dot(mesh.bnd_lengths, vals**2)) ** 0.5
    return vals, norm
