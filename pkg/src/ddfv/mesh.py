"""Three-mesh structure for discrete-duality finite volumes.

A primal polygonal mesh of a 2D domain induces two companion meshes: a dual
mesh built around the vertices from the surrounding cell centers, and a
diamond mesh with one quadrilateral per edge (degenerating to a triangle on
the boundary).  ``build_ddfv`` assembles all three together with the
geometric quantities the scheme needs: edge lengths, unit normals/tangents,
diamond areas, quarter-diamond splits and cell/dual-cell overlap areas.

Conventions per diamond (one per primal edge):

* the primal edge runs between vertices ``vert_k`` and ``vert_l``;
* the dual edge runs between the centers of cells ``cell_k`` and ``cell_l``
  (``cell_k`` is always an interior cell; ``cell_l`` may be the degenerate
  boundary cell sitting on a boundary edge, indexed after the interior ones);
* ``edge_normal`` is the unit normal to the primal edge oriented from
  ``cell_k`` towards ``cell_l``; ``dual_edge_normal`` is the unit normal to
  the dual edge oriented from ``vert_k`` towards ``vert_l``;
* vertices are labeled so that (edge_tangent, edge_normal) and
  (dual_edge_normal, dual_edge_tangent) are direct orthonormal bases.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateCell,
    NegativeArea,
    NonConvexDiamond,
    NonManifoldEdge,
    ParseError,
    ValidationError,
)
from .geometry import (
    cross2,
    polygon_area,
    polygon_centroid,
    segment_intersection,
    triangle_area,
)

_SIN_TOL = 1e-10
_PARAM_TOL = 1e-12


class PrimalMesh:
    """Polygonal partition of a connected 2D domain.

    Cells are vertex-index loops in counterclockwise order.  Boundary edges
    (edges with a single incident cell) are derived on construction and kept
    in discovery order, directed as traversed by their cell.
    """

    def __init__(self, vertices, cells):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise ValidationError("vertices must be an (n, 2) array")
        self.cells = [list(map(int, c)) for c in cells]
        for ci, loop in enumerate(self.cells):
            if len(loop) < 3:
                raise ValidationError(f"cell {ci} has fewer than 3 vertices")
            if len(set(loop)) != len(loop):
                raise ValidationError(f"cell {ci} repeats a vertex")
            if min(loop) < 0 or max(loop) >= len(self.vertices):
                raise ValidationError(f"cell {ci} references a missing vertex")
            if polygon_area(self.vertices[loop]) <= 0.0:
                raise NegativeArea(f"cell {ci} is not positively oriented")
        self._build_edges()

    def _build_edges(self):
        # Edge table: key = sorted vertex pair, value = list of (cell, va, vb)
        # with (va, vb) the directed edge as traversed by the cell.
        edge_order = []
        incidence = {}
        for ci, loop in enumerate(self.cells):
            for k in range(len(loop)):
                va, vb = loop[k], loop[(k + 1) % len(loop)]
                key = (va, vb) if va < vb else (vb, va)
                if key not in incidence:
                    incidence[key] = []
                    edge_order.append(key)
                incidence[key].append((ci, va, vb))
                if len(incidence[key]) > 2:
                    raise NonManifoldEdge(f"edge {key} shared by more than two cells")
        self.edge_keys = edge_order
        self.edge_cells = incidence
        self.boundary_edges = [
            incidence[key][0][1:] for key in edge_order if len(incidence[key]) == 1
        ]
        self._check_connected()

    def _check_connected(self):
        n = len(self.cells)
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for key in self.edge_keys:
            inc = self.edge_cells[key]
            if len(inc) == 2:
                ra, rb = find(inc[0][0]), find(inc[1][0])
                parent[ra] = rb
        if n and len({find(i) for i in range(n)}) != 1:
            raise ValidationError("cells do not form a connected domain")

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)


@dataclass
class DDFVMesh:
    """Immutable geometric database used by all discrete operators.

    Scalar fields carry one value per interior cell, per boundary (degenerate)
    cell and per vertex (dual cell); packed vectors use that order.
    """

    primal: PrimalMesh
    cell_centers: np.ndarray      # (n_cells, 2) polygon centroids
    cell_areas: np.ndarray        # (n_cells,)
    bnd_edges: np.ndarray         # (n_bnd, 2) directed vertex pairs
    bnd_centers: np.ndarray       # (n_bnd, 2) edge midpoints
    bnd_lengths: np.ndarray       # (n_bnd,)
    vertex_is_boundary: np.ndarray
    dual_areas: np.ndarray        # (n_verts,)
    # diamonds
    dia_cell_k: np.ndarray        # interior cell index
    dia_cell_l: np.ndarray        # global primal index (>= n_cells: boundary)
    dia_vert_k: np.ndarray
    dia_vert_l: np.ndarray
    dia_is_boundary: np.ndarray
    cross_point: np.ndarray       # (n_dia, 2) primal/dual edge crossing
    edge_len: np.ndarray
    dual_edge_len: np.ndarray
    sin_angle: np.ndarray
    diamond_area: np.ndarray
    edge_normal: np.ndarray       # (n_dia, 2)
    dual_edge_normal: np.ndarray
    edge_tangent: np.ndarray
    dual_edge_tangent: np.ndarray
    wedge_cell_k: np.ndarray      # quarter splits of the diamond area
    wedge_cell_l: np.ndarray
    wedge_vert_k: np.ndarray
    wedge_vert_l: np.ndarray
    diamond_diam: np.ndarray
    # overlaps between interior cells and dual cells
    overlap_cell: np.ndarray
    overlap_vert: np.ndarray
    overlap_area: np.ndarray
    h: float = field(init=False)
    domain_area: float = field(init=False)

    def __post_init__(self):
        self.h = float(self.diamond_diam.max())
        self.domain_area = float(self.cell_areas.sum())
        for name, value in vars(self).items():
            if isinstance(value, np.ndarray):
                value.setflags(write=False)

    # --- sizes and packed-vector layout -------------------------------

    @property
    def n_cells(self):
        return len(self.cell_areas)

    @property
    def n_bnd(self):
        return len(self.bnd_lengths)

    @property
    def n_verts(self):
        return len(self.dual_areas)

    @property
    def n_diamonds(self):
        return len(self.diamond_area)

    @property
    def n_values(self):
        return self.n_cells + self.n_bnd + self.n_verts

    @property
    def primal_centers(self):
        """Interior cell centroids stacked with boundary-edge midpoints."""
        return np.vstack([self.cell_centers, self.bnd_centers])

    @property
    def perimeter(self):
        return float(self.bnd_lengths.sum())

    def dual_polygon(self, v):
        """Vertex loop of dual cell ``v``: surrounding centers sorted by angle
        around the vertex, plus the vertex itself and the adjacent
        boundary-edge midpoints when the vertex lies on the boundary."""
        x0 = self.primal.vertices[v]
        pts = []
        for d in range(self.n_diamonds):
            for vert, cells in (
                (self.dia_vert_k[d], (self.dia_cell_k[d], self.dia_cell_l[d])),
                (self.dia_vert_l[d], (self.dia_cell_k[d], self.dia_cell_l[d])),
            ):
                if vert == v:
                    for g in cells:
                        pts.append(tuple(self.primal_centers[g]))
        pts = [np.array(p) for p in sorted(set(pts))]
        angles = np.array([np.arctan2(p[1] - x0[1], p[0] - x0[0]) for p in pts])
        order = np.argsort(angles)
        pts = [pts[i] for i in order]
        if not self.vertex_is_boundary[v]:
            return np.array(pts)
        # Boundary vertex: rotate the cyclic order so the outside gap (the
        # largest angular jump) sits between the last and first point, then
        # close the loop through the vertex itself.
        ang = np.sort(angles)
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
        start = (int(np.argmax(gaps)) + 1) % len(pts)
        pts = pts[start:] + pts[:start]
        return np.array([x0] + pts)


def build_ddfv(primal: PrimalMesh) -> DDFVMesh:
    """Assemble the full DDFV structure from a valid primal mesh.

    Raises NonConvexDiamond when a primal edge and its dual edge fail to
    cross (or cross at a nearly-degenerate angle), NonManifoldEdge /
    NegativeArea on defective input.
    """
    verts = primal.vertices
    n_cells = primal.n_cells
    cell_areas = np.array([polygon_area(verts[c]) for c in primal.cells])
    cell_centers = np.array([polygon_centroid(verts[c]) for c in primal.cells])

    bnd_edges = np.array(primal.boundary_edges, dtype=int).reshape(-1, 2)
    bnd_centers = 0.5 * (verts[bnd_edges[:, 0]] + verts[bnd_edges[:, 1]])
    bnd_lengths = np.hypot(*(verts[bnd_edges[:, 1]] - verts[bnd_edges[:, 0]]).T)
    bnd_index = {
        tuple(sorted(e)): i for i, e in enumerate(map(tuple, bnd_edges))
    }

    vertex_is_boundary = np.zeros(primal.n_vertices, dtype=bool)
    vertex_is_boundary[bnd_edges.ravel()] = True

    dia = {
        name: []
        for name in (
            "cell_k", "cell_l", "vert_k", "vert_l", "is_boundary",
            "cross_point", "edge_len", "dual_edge_len", "sin_angle", "area",
            "edge_normal", "dual_edge_normal", "edge_tangent",
            "dual_edge_tangent", "wck", "wcl", "wvk", "wvl", "diam",
        )
    }
    dual_areas = np.zeros(primal.n_vertices)
    overlaps = {}

    def add_overlap(cell, vert, area):
        overlaps[(cell, vert)] = overlaps.get((cell, vert), 0.0) + area

    for key in primal.edge_keys:
        incident = primal.edge_cells[key]
        ck = incident[0][0]
        if len(incident) == 2:
            cl_glob = incident[1][0]
            is_bnd = False
            xl = cell_centers[cl_glob]
        else:
            b = bnd_index[key]
            cl_glob = n_cells + b
            is_bnd = True
            xl = bnd_centers[b]
        xk = cell_centers[ck]

        va, vb = key
        # Label the edge endpoints so both local bases come out direct.
        if cross2(verts[vb] - verts[va], xl - xk) > 0.0:
            vk, vl = va, vb
        else:
            vk, vl = vb, va
        xvk, xvl = verts[vk], verts[vl]

        edge_vec = xvl - xvk
        dual_vec = xl - xk
        m_edge = float(np.hypot(*edge_vec))
        m_dual = float(np.hypot(*dual_vec))
        if m_edge == 0.0 or m_dual == 0.0:
            raise NonConvexDiamond(f"edge {key}: degenerate diamond")
        tau_e = edge_vec / m_edge
        tau_d = dual_vec / m_dual
        sin_a = float(cross2(tau_e, tau_d))
        if sin_a <= _SIN_TOL:
            raise NonConvexDiamond(
                f"edge {key}: sin(angle) = {sin_a:.3e} below tolerance"
            )
        area = 0.5 * m_edge * m_dual * sin_a
        n_e = np.array([-tau_e[1], tau_e[0]])
        n_d = np.array([tau_d[1], -tau_d[0]])

        if is_bnd:
            xd = xl
        else:
            hit = segment_intersection(xk, xl, xvk, xvl)
            if hit is None:
                raise NonConvexDiamond(f"edge {key}: parallel primal/dual edges")
            t, s, xd = hit
            if not (-_PARAM_TOL <= t <= 1 + _PARAM_TOL
                    and -_PARAM_TOL <= s <= 1 + _PARAM_TOL):
                raise NonConvexDiamond(
                    f"edge {key}: primal and dual edges do not cross"
                )

        wvk = triangle_area(xvk, xk, xl)
        wvl = triangle_area(xvl, xk, xl)
        if is_bnd:
            wck, wcl = area, 0.0
        else:
            wck = triangle_area(xk, xvk, xvl)
            wcl = triangle_area(xl, xvk, xvl)
            if min(wck, wcl) <= 0.0 or abs(wck + wcl - area) > 1e-9 * area:
                raise NegativeArea(f"edge {key}: invalid primal quarter split")
        if min(wvk, wvl) <= 0.0 or abs(wvk + wvl - area) > 1e-9 * area:
            raise NegativeArea(f"edge {key}: invalid dual quarter split")

        dual_areas[vk] += wvk
        dual_areas[vl] += wvl

        add_overlap(ck, vk, triangle_area(xk, xd, xvk))
        add_overlap(ck, vl, triangle_area(xk, xd, xvl))
        if not is_bnd:
            add_overlap(cl_glob, vk, triangle_area(xl, xd, xvk))
            add_overlap(cl_glob, vl, triangle_area(xl, xd, xvl))

        corners = np.array([xk, xvk, xl, xvl])
        diam = max(
            float(np.hypot(*(corners[i] - corners[j])))
            for i in range(4) for j in range(i + 1, 4)
        )

        dia["cell_k"].append(ck)
        dia["cell_l"].append(cl_glob)
        dia["vert_k"].append(vk)
        dia["vert_l"].append(vl)
        dia["is_boundary"].append(is_bnd)
        dia["cross_point"].append(xd)
        dia["edge_len"].append(m_edge)
        dia["dual_edge_len"].append(m_dual)
        dia["sin_angle"].append(sin_a)
        dia["area"].append(area)
        dia["edge_normal"].append(n_e)
        dia["dual_edge_normal"].append(n_d)
        dia["edge_tangent"].append(tau_e)
        dia["dual_edge_tangent"].append(tau_d)
        dia["wck"].append(wck)
        dia["wcl"].append(wcl)
        dia["wvk"].append(wvk)
        dia["wvl"].append(wvl)
        dia["diam"].append(diam)

    ov_keys = sorted(overlaps)
    mesh = DDFVMesh(
        primal=primal,
        cell_centers=cell_centers,
        cell_areas=cell_areas,
        bnd_edges=bnd_edges,
        bnd_centers=bnd_centers,
        bnd_lengths=np.asarray(bnd_lengths, dtype=float),
        vertex_is_boundary=vertex_is_boundary,
        dual_areas=dual_areas,
        dia_cell_k=np.array(dia["cell_k"], dtype=int),
        dia_cell_l=np.array(dia["cell_l"], dtype=int),
        dia_vert_k=np.array(dia["vert_k"], dtype=int),
        dia_vert_l=np.array(dia["vert_l"], dtype=int),
        dia_is_boundary=np.array(dia["is_boundary"], dtype=bool),
        cross_point=np.array(dia["cross_point"]),
        edge_len=np.array(dia["edge_len"]),
        dual_edge_len=np.array(dia["dual_edge_len"]),
        sin_angle=np.array(dia["sin_angle"]),
        diamond_area=np.array(dia["area"]),
        edge_normal=np.array(dia["edge_normal"]),
        dual_edge_normal=np.array(dia["dual_edge_normal"]),
        edge_tangent=np.array(dia["edge_tangent"]),
        dual_edge_tangent=np.array(dia["dual_edge_tangent"]),
        wedge_cell_k=np.array(dia["wck"]),
        wedge_cell_l=np.array(dia["wcl"]),
        wedge_vert_k=np.array(dia["wvk"]),
        wedge_vert_l=np.array(dia["wvl"]),
        diamond_diam=np.array(dia["diam"]),
        overlap_cell=np.array([k[0] for k in ov_keys], dtype=int),
        overlap_vert=np.array([k[1] for k in ov_keys], dtype=int),
        overlap_area=np.array([overlaps[k] for k in ov_keys]),
    )
    _validate_partitions(mesh)
    return mesh


def _validate_partitions(mesh):
    """Cheap exact-identity checks run at the end of every build."""
    tol = 1e-10 * max(mesh.domain_area, 1.0)
    checks = [
        ("diamond areas", mesh.diamond_area.sum()),
        ("dual-cell areas", mesh.dual_areas.sum()),
        ("overlap areas", mesh.overlap_area.sum()),
    ]
    for name, total in checks:
        if abs(total - mesh.domain_area) > tol:
            raise ValidationError(
                f"{name} sum {total!r} does not match domain area "
                f"{mesh.domain_area!r}"
            )


# --- quality -----------------------------------------------------------


@dataclass
class QualityReport:
    theta: np.ndarray
    theta_tilde: np.ndarray
    theta_star: float
    theta_interior_max: float
    min_sin_angle: float
    h: float
    n_cells: int
    n_bnd_edges: int
    n_verts: int
    n_diamonds: int
    cond2_max: float | None = None
    cond2_bound: float | None = None

    @property
    def cond_ok(self):
        if self.cond2_max is None:
            return True
        return self.cond2_max < self.cond2_bound

    def summary(self):
        lines = [
            f"cells              {self.n_cells}",
            f"boundary edges     {self.n_bnd_edges}",
            f"vertices           {self.n_verts}",
            f"diamonds           {self.n_diamonds}",
            f"h                  {self.h:.6e}",
            f"min sin(angle)     {self.min_sin_angle:.6e}",
            f"theta interior max {self.theta_interior_max:.6f}",
            f"theta max          {self.theta.max():.6f}",
            f"theta_tilde max    {self.theta_tilde.max():.6f}",
            f"theta_star         {self.theta_star:.6f}",
        ]
        if self.cond2_max is not None:
            lines.append(f"cond2 max          {self.cond2_max:.6f}")
            lines.append(
                f"cond2 bound        {self.cond2_bound:.6f}"
                f" ({'ok' if self.cond_ok else 'VIOLATED'})"
            )
        return "\n".join(lines)


def quality(mesh: DDFVMesh, lam=None) -> QualityReport:
    """Regularity factors of every diamond, plus the local-matrix
    condition numbers when an anisotropy tensor is supplied."""
    ratio = mesh.edge_len / mesh.dual_edge_len
    theta = (ratio + 1.0 / ratio) / (2.0 * mesh.sin_angle)

    parts = np.stack(
        [
            mesh.wedge_cell_k,
            np.where(mesh.dia_is_boundary, np.inf, mesh.wedge_cell_l),
            mesh.wedge_vert_k,
            mesh.wedge_vert_l,
        ]
    )
    theta_tilde = mesh.diamond_area / parts.min(axis=0)

    interior = ~mesh.dia_is_boundary
    theta_interior_max = float(theta[interior].max()) if interior.any() else float("nan")
    report = QualityReport(
        theta=theta,
        theta_tilde=theta_tilde,
        theta_star=float(max(theta.max(), theta_tilde.max())),
        theta_interior_max=theta_interior_max,
        min_sin_angle=float(mesh.sin_angle.min()),
        h=mesh.h,
        n_cells=mesh.n_cells,
        n_bnd_edges=mesh.n_bnd,
        n_verts=mesh.n_verts,
        n_diamonds=mesh.n_diamonds,
    )
    if lam is not None:
        from .operators import local_matrices

        mats = local_matrices(mesh, lam)
        report.cond2_max = float(mats.cond2().max())
        lam_d = lam.on_diamonds(mesh)
        lam_min, lam_max = lam.bounds(lam_d)
        report.cond2_bound = 4.0 * report.theta_star**2 * lam_max / lam_min
    return report


# --- generators --------------------------------------------------------


def gen_uniform_quad(n: int) -> PrimalMesh:
    """Uniform n-by-n quadrilateral mesh of the unit square."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    xs = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    cells = [
        [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
        for j in range(n)
        for i in range(n)
    ]
    return PrimalMesh(vertices, cells)


def _distorted_quad(n, displace):
    base = gen_uniform_quad(n)
    vertices = base.vertices.copy()
    for idx in range(len(vertices)):
        i, j = idx % (n + 1), idx // (n + 1)
        vertices[idx] = displace(i, j, vertices[idx])
    cells = base.cells
    for ci, loop in enumerate(cells):
        if polygon_area(vertices[loop]) <= 0.0:
            raise DegenerateCell(f"cell {ci} inverted under distortion")
    return PrimalMesh(vertices, cells)


def gen_quad_fvca(n: int, amplitude: float = 0.1) -> PrimalMesh:
    """Smooth sinusoidal distortion of the uniform grid.

    Vertex (x, y) moves to (x + d, y + d) with
    d = amplitude * sin(2*pi*x) * sin(2*pi*y); boundary vertices stay put.
    """
    if n < 2:
        raise ValidationError("n must be >= 2")
    if not 0.0 <= amplitude < 0.25:
        raise ValidationError("amplitude must lie in [0, 0.25)")

    def displace(i, j, p):
        d = amplitude * np.sin(2 * np.pi * p[0]) * np.sin(2 * np.pi * p[1])
        return p + d

    return _distorted_quad(n, displace)


_ZIGZAG = (0.0, 1.0, 0.0, -1.0)


def gen_kershaw(n: int, distortion: float = 0.8) -> PrimalMesh:
    """Layered zigzag distortion of the uniform grid (n/4 zigzag layers).

    Column i is sheared vertically by distortion * zig(i) * profile(j) cell
    heights, where zig cycles through (0, 1, 0, -1) every four columns and
    the hat profile vanishes on the top and bottom boundaries.  Boundary
    columns are pinned so all boundary vertices stay put.
    """
    if n < 2:
        raise ValidationError("n must be >= 2")
    if distortion < 0.0:
        raise ValidationError("distortion must be nonnegative")
    half = (n + 1) // 2

    def displace(i, j, p):
        if i == 0 or i == n:
            return p
        zig = _ZIGZAG[i % 4]
        prof = min(j, n - j) / half
        return np.array([p[0], (j + distortion * zig * prof) / n])

    return _distorted_quad(n, displace)


MESH_FAMILIES = {
    "uniform": lambda n, **kw: gen_uniform_quad(n),
    "quad": gen_quad_fvca,
    "kershaw": gen_kershaw,
}


def gen_family(family: str, n: int, **kwargs) -> PrimalMesh:
    try:
        gen = MESH_FAMILIES[family]
    except KeyError:
        raise ValidationError(
            f"unknown mesh family {family!r}; choose from {sorted(MESH_FAMILIES)}"
        ) from None
    return gen(n, **kwargs)


# --- file I/O ----------------------------------------------------------


def write_mesh(primal: PrimalMesh, path):
    """Write a primal mesh in the plain-text format (full float precision)."""
    with open(path, "w", encoding="ascii") as f:
        f.write(f"vertices {primal.n_vertices}\n")
        for x, y in primal.vertices:
            f.write(f"{float(x)!r} {float(y)!r}\n")
        f.write(f"cells {primal.n_cells}\n")
        for loop in primal.cells:
            f.write(" ".join([str(len(loop))] + [str(v) for v in loop]) + "\n")


def read_mesh(path) -> PrimalMesh:
    """Read a primal mesh written by ``write_mesh``.

    Clockwise cells are reoriented with a warning; malformed content raises
    ParseError carrying the offending line number.
    """
    with open(path, "r", encoding="ascii") as f:
        raw = f.readlines()
    lines = [
        (i + 1, line.strip())
        for i, line in enumerate(raw)
        if line.strip() and not line.strip().startswith("#")
    ]
    pos = 0

    def next_line(expect):
        nonlocal pos
        if pos >= len(lines):
            raise ParseError(f"unexpected end of file, expected {expect}",
                             line=len(raw))
        lineno, text = lines[pos]
        pos += 1
        return lineno, text.split()

    lineno, tok = next_line("'vertices N'")
    if len(tok) != 2 or tok[0] != "vertices":
        raise ParseError("expected 'vertices N'", line=lineno)
    try:
        n_verts = int(tok[1])
    except ValueError:
        raise ParseError("vertex count is not an integer", line=lineno) from None

    vertices = np.empty((n_verts, 2))
    for i in range(n_verts):
        lineno, tok = next_line("a vertex line 'x y'")
        if len(tok) != 2:
            raise ParseError("expected 'x y'", line=lineno)
        try:
            vertices[i] = [float(tok[0]), float(tok[1])]
        except ValueError:
            raise ParseError("vertex coordinates are not numbers",
                             line=lineno) from None

    lineno, tok = next_line("'cells M'")
    if len(tok) != 2 or tok[0] != "cells":
        raise ParseError("expected 'cells M'", line=lineno)
    try:
        n_cells = int(tok[1])
    except ValueError:
        raise ParseError("cell count is not an integer", line=lineno) from None

    cells = []
    for i in range(n_cells):
        lineno, tok = next_line("a cell line 'k i1 ... ik'")
        try:
            nums = [int(t) for t in tok]
        except ValueError:
            raise ParseError("cell line contains a non-integer",
                             line=lineno) from None
        if not nums or len(nums) != nums[0] + 1:
            raise ParseError("cell line length does not match its count",
                             line=lineno)
        loop = nums[1:]
        if min(loop) < 0 or max(loop) >= n_verts:
            raise ParseError(f"cell {i} references a missing vertex",
                             line=lineno)
        if polygon_area(vertices[loop]) < 0.0:
            warnings.warn(f"cell {i} was clockwise; reoriented", stacklevel=2)
            loop = loop[::-1]
        cells.append(loop)

    if pos < len(lines):
        raise ParseError("trailing content after last cell", line=lines[pos][0])
    return PrimalMesh(vertices, cells)
