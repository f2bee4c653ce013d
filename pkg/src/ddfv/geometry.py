"""Planar geometry helpers shared by mesh construction and tests.

Everything operates on plain float pairs / numpy arrays; no mesh data
structures are involved, which keeps these routines usable as independent
oracles in the test suite.
"""

import numpy as np


def cross2(a, b):
    """z-component of the 2D cross product a x b."""
    return a[0] * b[1] - a[1] * b[0]


def rot90(v):
    """Rotate a 2-vector by +90 degrees (counterclockwise)."""
    return np.array([-v[1], v[0]])


def polygon_area(points):
    """Signed (shoelace) area of a polygon given as an (n, 2) array."""
    pts = np.asarray(points, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_centroid(points):
    """Area centroid of a simple polygon with positive orientation."""
    pts = np.asarray(points, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    w = x * yn - xn * y
    area = 0.5 * float(np.sum(w))
    cx = float(np.sum((x + xn) * w)) / (6.0 * area)
    cy = float(np.sum((y + yn) * w)) / (6.0 * area)
    return np.array([cx, cy])


def triangle_area(a, b, c):
    """Unsigned area of the triangle (a, b, c)."""
    a = np.asarray(a, dtype=float)
    return 0.5 * abs(cross2(np.asarray(b) - a, np.asarray(c) - a))


def segment_intersection(p0, p1, q0, q1):
    """Intersection parameters (t, s) of segments [p0,p1] and [q0,q1].

    Returns (t, s, point) with p0 + t*(p1-p0) = q0 + s*(q1-q0), or None when
    the segments are parallel.
    """
    p0 = np.asarray(p0, dtype=float)
    d1 = np.asarray(p1, dtype=float) - p0
    q0 = np.asarray(q0, dtype=float)
    d2 = np.asarray(q1, dtype=float) - q0
    denom = cross2(d1, d2)
    if denom == 0.0:
        return None
    r = q0 - p0
    t = cross2(r, d2) / denom
    s = cross2(r, d1) / denom
    return t, s, p0 + t * d1


def diamond_geometry(x_cell_k, x_cell_l, x_vert_k, x_vert_l):
    """Geometric quantities of a single diamond from its four corners.

    The primal edge runs from x_vert_k to x_vert_l, the dual edge from
    x_cell_k to x_cell_l.  Normal signs follow the scheme conventions: the
    primal-edge normal points from cell k towards cell l, the dual-edge
    normal from vertex k towards vertex l.  No relabeling is done here, so
    the returned basis need not be direct; mesh construction relabels the
    vertices first to guarantee that.
    """
    xk = np.asarray(x_cell_k, dtype=float)
    xl = np.asarray(x_cell_l, dtype=float)
    xvk = np.asarray(x_vert_k, dtype=float)
    xvl = np.asarray(x_vert_l, dtype=float)

    edge_vec = xvl - xvk
    dual_vec = xl - xk
    edge_len = float(np.hypot(*edge_vec))
    dual_len = float(np.hypot(*dual_vec))
    if edge_len == 0.0 or dual_len == 0.0:
        raise ValueError("degenerate diamond: zero-length edge")
    tau_edge = edge_vec / edge_len
    tau_dual = dual_vec / dual_len

    normal_edge = rot90(tau_edge)
    if float(np.dot(normal_edge, dual_vec)) < 0.0:
        normal_edge = -normal_edge
    normal_dual = -rot90(tau_dual)
    if float(np.dot(normal_dual, edge_vec)) < 0.0:
        normal_dual = -normal_dual

    sin_angle = abs(cross2(tau_dual, tau_edge))
    area = 0.5 * edge_len * dual_len * sin_angle
    return {
        "edge_len": edge_len,
        "dual_edge_len": dual_len,
        "edge_tangent": tau_edge,
        "dual_edge_tangent": tau_dual,
        "edge_normal": normal_edge,
        "dual_edge_normal": normal_dual,
        "sin_angle": sin_angle,
        "area": area,
    }


def gradient_on_diamond(geom, u_cell_k, u_cell_l, u_vert_k, u_vert_l):
    """Constant gradient on one diamond from the four corner values."""
    num = (
        geom["edge_len"] * (u_cell_l - u_cell_k) * geom["edge_normal"]
        + geom["dual_edge_len"] * (u_vert_l - u_vert_k) * geom["dual_edge_normal"]
    )
    return num / (2.0 * geom["area"])
