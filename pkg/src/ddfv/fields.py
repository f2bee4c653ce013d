"""Scalar fields on the DDFV meshes and anisotropy tensor specifications.

A DiscreteField owns one packed vector laid out as
[interior cells | boundary cells | dual cells]; the named components are
views into it, so solver code can work on the vector while tests and
operators address the pieces by name.  Per-diamond data (gradients, fluxes,
reconstructions) is kept as plain numpy arrays of shape (n_diamonds,) or
(n_diamonds, 2).
"""

import numpy as np

from .errors import NotSPD, ValidationError


class DiscreteField:
    """One value per interior cell, boundary cell and dual cell."""

    __slots__ = ("mesh", "values")

    def __init__(self, mesh, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (mesh.n_values,):
            raise ValidationError(
                f"field length {values.shape} does not match mesh "
                f"({mesh.n_values} values)"
            )
        self.mesh = mesh
        self.values = values

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros(mesh.n_values))

    @classmethod
    def full(cls, mesh, value):
        return cls(mesh, np.full(mesh.n_values, float(value)))

    @classmethod
    def from_components(cls, mesh, interior, boundary, dual):
        return cls(mesh, np.concatenate([
            np.asarray(interior, dtype=float),
            np.asarray(boundary, dtype=float),
            np.asarray(dual, dtype=float),
        ]))

    @property
    def interior(self):
        return self.values[: self.mesh.n_cells]

    @property
    def boundary(self):
        return self.values[self.mesh.n_cells: self.mesh.n_cells + self.mesh.n_bnd]

    @property
    def dual(self):
        return self.values[self.mesh.n_cells + self.mesh.n_bnd:]

    @property
    def primal_all(self):
        """Interior and boundary values, indexed by global primal index."""
        return self.values[: self.mesh.n_cells + self.mesh.n_bnd]

    def copy(self):
        return DiscreteField(self.mesh, self.values.copy())

    def __add__(self, other):
        return DiscreteField(self.mesh, self.values + _vals(other))

    def __sub__(self, other):
        return DiscreteField(self.mesh, self.values - _vals(other))

    def __mul__(self, scalar):
        return DiscreteField(self.mesh, self.values * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return (f"DiscreteField({self.mesh.n_cells} cells, {self.mesh.n_bnd} "
                f"boundary, {self.mesh.n_verts} dual)")


def _vals(other):
    return other.values if isinstance(other, DiscreteField) else other


def _check_spd(mat):
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (2, 2):
        raise NotSPD("tensor must be a 2x2 matrix")
    if abs(mat[0, 1] - mat[1, 0]) > 1e-12 * (1.0 + abs(mat).max()):
        raise NotSPD("tensor is not symmetric")
    evals = np.linalg.eigvalsh(mat)
    if evals.min() <= 0.0:
        raise NotSPD(f"tensor has nonpositive eigenvalue {evals.min():.3e}")
    return mat, float(evals.min()), float(evals.max())


class TensorSpec:
    """Diffusion tensor: identity, constant SPD, rotated diagonal or callable.

    Per-diamond values average the tensor over the diamond; for a callable
    this is a one-point evaluation at the diamond's area barycenter.
    Ellipticity bounds are exact for constant tensors and sampled from the
    evaluation points for callables (unless given explicitly).
    """

    def __init__(self, kind, matrix=None, func=None, bounds=None):
        self.kind = kind
        self.matrix = matrix
        self.func = func
        self._bounds = bounds

    @classmethod
    def identity(cls):
        return cls("identity", matrix=np.eye(2), bounds=(1.0, 1.0))

    @classmethod
    def constant(cls, matrix):
        mat, lo, hi = _check_spd(matrix)
        return cls("constant", matrix=mat, bounds=(lo, hi))

    @classmethod
    def rotated(cls, lam1, lam2, angle):
        """R(angle) @ diag(lam1, lam2) @ R(angle).T"""
        if lam1 <= 0 or lam2 <= 0:
            raise NotSPD("rotated-diagonal eigenvalues must be positive")
        c, s = np.cos(angle), np.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        mat = rot @ np.diag([float(lam1), float(lam2)]) @ rot.T
        return cls("constant", matrix=mat,
                   bounds=(min(lam1, lam2), max(lam1, lam2)))

    @classmethod
    def from_callable(cls, func, bounds=None):
        return cls("callable", func=func, bounds=bounds)

    @classmethod
    def parse(cls, text):
        """Parse CLI/config syntax: 'identity', 'diag:a,b',
        'rotated:a,b,angle' or 'matrix:a11,a12,a22'."""
        text = text.strip()
        if text == "identity":
            return cls.identity()
        if ":" not in text:
            raise ValidationError(f"cannot parse tensor spec {text!r}")
        head, args = text.split(":", 1)
        try:
            nums = [float(t) for t in args.split(",")]
        except ValueError:
            raise ValidationError(f"cannot parse tensor spec {text!r}") from None
        if head == "diag" and len(nums) == 2:
            return cls.constant(np.diag(nums))
        if head == "rotated" and len(nums) == 3:
            return cls.rotated(nums[0], nums[1], nums[2])
        if head == "matrix" and len(nums) == 3:
            a11, a12, a22 = nums
            return cls.constant(np.array([[a11, a12], [a12, a22]]))
        raise ValidationError(f"cannot parse tensor spec {text!r}")

    def on_diamonds(self, mesh):
        """Per-diamond tensors as an (n_diamonds, 2, 2) array."""
        n = mesh.n_diamonds
        if self.kind in ("identity", "constant"):
            return np.broadcast_to(self.matrix, (n, 2, 2)).copy()
        # Area barycenter of the diamond: wedge-weighted mean of the two
        # triangle centroids on either side of the primal edge.
        centers = mesh.primal_centers
        xk = centers[mesh.dia_cell_k]
        xl = centers[mesh.dia_cell_l]
        xvk = mesh.primal.vertices[mesh.dia_vert_k]
        xvl = mesh.primal.vertices[mesh.dia_vert_l]
        ck = (xk + xvk + xvl) / 3.0
        cl = (xl + xvk + xvl) / 3.0
        w = (mesh.wedge_cell_k + mesh.wedge_cell_l)
        bary = (ck * mesh.wedge_cell_k[:, None] + cl * mesh.wedge_cell_l[:, None])
        bary /= w[:, None]
        out = np.empty((n, 2, 2))
        for d in range(n):
            mat, _, _ = _check_spd(self.func(bary[d]))
            out[d] = mat
        return out

    def bounds(self, lam_d=None):
        """(lambda_min, lambda_max) ellipticity bounds."""
        if self._bounds is not None:
            return self._bounds
        if lam_d is None:
            raise ValidationError(
                "callable tensor without stored bounds needs sampled values"
            )
        evals = np.linalg.eigvalsh(lam_d)
        return float(evals.min()), float(evals.max())
