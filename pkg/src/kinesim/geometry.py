"""Parametric channel cross-sections and their boundary geometry.

Three shape families are supported: axis-aligned rectangles, regular polygons
(one vertex on the +x axis), and regular polygonal rings.  All shapes are
centered at the origin so that "left wall" / "right wall" zone placement is
well defined.  A circular channel is conventionally represented by a regular
polygon with n >= 20 sides.

Boundary chains are stored so that the channel interior lies on the LEFT of
every directed edge: the outer chain runs counter-clockwise, the inner (hole)
chain of a ring runs clockwise around the hole.  Containment is closed with
tolerance ``GEOM_EPS``: points within 1e-9 um of an edge count as interior,
because the simulator deliberately places microtubule heads on the boundary
while wall-following.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from . import _kernels
from .errors import ConfigError

#: closed-containment tolerance for point-on-edge tests, in micrometres
GEOM_EPS = 1e-9

KIND_RECTANGLE = 0
KIND_POLYGON = 1
KIND_RING = 2


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle, width along x and length along y."""

    width_um: float
    length_um: float

    def __post_init__(self):
        if not (self.width_um > 0 and self.length_um > 0):
            raise ConfigError(
                f"rectangle sides must be positive, got "
                f"{self.width_um} x {self.length_um}"
            )


@dataclass(frozen=True)
class RegularPolygon:
    """Regular n-gon given by its circumradius, one vertex on the +x axis."""

    sides: int
    radius_um: float

    def __post_init__(self):
        if int(self.sides) != self.sides or self.sides < 3:
            raise ConfigError(f"polygon needs an integer n >= 3, got {self.sides}")
        if not self.radius_um > 0:
            raise ConfigError(f"polygon radius must be positive, got {self.radius_um}")


@dataclass(frozen=True)
class PolygonRing:
    """Regular polygonal ring: n-gon of circumradius r_o minus an open
    concentric n-gon hole of circumradius r_i.  r_i = 0 degenerates to the
    solid polygon."""

    sides: int
    inner_radius_um: float
    outer_radius_um: float

    def __post_init__(self):
        if int(self.sides) != self.sides or self.sides < 3:
            raise ConfigError(f"ring needs an integer n >= 3, got {self.sides}")
        if not (0 <= self.inner_radius_um < self.outer_radius_um):
            raise ConfigError(
                f"ring radii must satisfy 0 <= r_i < r_o, got "
                f"r_i={self.inner_radius_um}, r_o={self.outer_radius_um}"
            )


ChannelShape = Union[Rectangle, RegularPolygon, PolygonRing]


@dataclass(frozen=True)
class BoundaryEdge:
    """One directed boundary segment; the channel interior is on its left."""

    start: tuple[float, float]
    end: tuple[float, float]
    chain: str  # "outer" or "inner"
    index: int  # global edge index within edges(shape)

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    @property
    def direction(self) -> tuple[float, float]:
        L = self.length
        return ((self.end[0] - self.start[0]) / L, (self.end[1] - self.start[1]) / L)

    @property
    def interior_normal(self) -> tuple[float, float]:
        ux, uy = self.direction
        return (-uy, ux)


@dataclass(frozen=True)
class ExitHit:
    """First boundary crossing reported by :func:`first_exit`."""

    edge: BoundaryEdge
    point: tuple[float, float]
    travelled: float


class EdgePack:
    """Flat array view of a shape's boundary for the numba kernels.

    Edges are stored chain by chain (outer first); ``chain_ptr`` delimits the
    chains CSR-style and ``ccw_sign`` is +1 where stored order is
    counter-clockwise in the plane.
    """

    def __init__(self, shape: ChannelShape):
        chains = _chain_vertices(shape)
        starts, units, lens, norms, chain_ids = [], [], [], [], []
        ptr = [0]
        sign = []
        for ci, verts in enumerate(chains):
            n = len(verts)
            for k in range(n):
                p = verts[k]
                q = verts[(k + 1) % n]
                d = q - p
                L = math.hypot(d[0], d[1])
                u = d / L
                starts.append(p)
                units.append(u)
                lens.append(L)
                norms.append((-u[1], u[0]))  # left normal = interior side
                chain_ids.append(ci)
            ptr.append(ptr[-1] + n)
            sign.append(1 if ci == 0 else -1)

        self.start = np.asarray(starts, dtype=np.float64)
        self.unit = np.asarray(units, dtype=np.float64)
        self.length = np.asarray(lens, dtype=np.float64)
        self.normal = np.asarray(norms, dtype=np.float64)
        self.chain_id = np.asarray(chain_ids, dtype=np.int64)
        self.chain_ptr = np.asarray(ptr, dtype=np.int64)
        self.ccw_sign = np.asarray(sign, dtype=np.int64)
        # travel direction angles along each edge, forward and reversed,
        # wrapped to (-pi, pi]
        fwd = np.arctan2(self.unit[:, 1], self.unit[:, 0])
        rev = np.where(fwd > 0, fwd - math.pi, fwd + math.pi)
        self.angle = np.column_stack((fwd, rev))

        # scalar parameters backing the O(1) containment / margin tests
        if isinstance(shape, Rectangle):
            self.kind = KIND_RECTANGLE
            self.half_w = shape.width_um / 2.0
            self.half_l = shape.length_um / 2.0
            self.apothem = min(self.half_w, self.half_l)
            self.inner_radius = 0.0
        elif isinstance(shape, RegularPolygon):
            self.kind = KIND_POLYGON
            self.half_w = self.half_l = 0.0
            self.apothem = shape.radius_um * math.cos(math.pi / shape.sides)
            self.inner_radius = 0.0
        else:
            self.kind = KIND_RING if shape.inner_radius_um > 0 else KIND_POLYGON
            self.half_w = self.half_l = 0.0
            self.apothem = shape.outer_radius_um * math.cos(math.pi / shape.sides)
            self.inner_radius = shape.inner_radius_um

        xs = self.start[:, 0]
        ys = self.start[:, 1]
        self.bbox = (xs.min(), xs.max(), ys.min(), ys.max())

    @property
    def scalar_args(self):
        """(kind, half_w, half_l, apothem, inner_radius) for the kernels."""
        return (self.kind, self.half_w, self.half_l, self.apothem, self.inner_radius)

    @property
    def edge_args(self):
        """Edge arrays in the order the kernels expect."""
        return (
            self.start,
            self.unit,
            self.length,
            self.normal,
            self.chain_ptr,
            self.ccw_sign,
            self.angle,
        )


def _polygon_vertices(n: int, r: float, clockwise: bool = False) -> np.ndarray:
    k = np.arange(n)
    ang = 2.0 * math.pi * k / n
    if clockwise:
        ang = -ang
    return np.column_stack((r * np.cos(ang), r * np.sin(ang)))


def _chain_vertices(shape: ChannelShape) -> list[np.ndarray]:
    if isinstance(shape, Rectangle):
        w2, l2 = shape.width_um / 2.0, shape.length_um / 2.0
        return [np.array([(-w2, -l2), (w2, -l2), (w2, l2), (-w2, l2)], dtype=float)]
    if isinstance(shape, RegularPolygon):
        return [_polygon_vertices(shape.sides, shape.radius_um)]
    chains = [_polygon_vertices(shape.sides, shape.outer_radius_um)]
    if shape.inner_radius_um > 0:
        # clockwise around the hole keeps the ring interior on the left
        chains.append(_polygon_vertices(shape.sides, shape.inner_radius_um, clockwise=True))
    return chains


@lru_cache(maxsize=256)
def edge_pack(shape: ChannelShape) -> EdgePack:
    """Cached flat-array boundary representation of a shape."""
    return EdgePack(shape)


def area(shape: ChannelShape) -> float:
    """Cross-sectional area in um^2 (closed form)."""
    if isinstance(shape, Rectangle):
        return shape.width_um * shape.length_um
    if isinstance(shape, RegularPolygon):
        n, r = shape.sides, shape.radius_um
        return 0.5 * n * r * r * math.sin(2.0 * math.pi / n)
    n = shape.sides
    ro, ri = shape.outer_radius_um, shape.inner_radius_um
    return 0.5 * n * (ro * ro - ri * ri) * math.sin(2.0 * math.pi / n)


def perimeter(shape: ChannelShape) -> float:
    """Boundary length in um.

    For rings this is the OUTER chain only, matching the length an MT covers
    in one circuit of the channel and the constraint used by the shape
    optimizer; :func:`total_boundary_length` includes the hole boundary.
    """
    if isinstance(shape, Rectangle):
        return 2.0 * (shape.width_um + shape.length_um)
    if isinstance(shape, RegularPolygon):
        return 2.0 * shape.sides * shape.radius_um * math.sin(math.pi / shape.sides)
    return 2.0 * shape.sides * shape.outer_radius_um * math.sin(math.pi / shape.sides)


def total_boundary_length(shape: ChannelShape) -> float:
    """Outer plus inner boundary length (diagnostics only)."""
    if isinstance(shape, PolygonRing) and shape.inner_radius_um > 0:
        inner = 2.0 * shape.sides * shape.inner_radius_um * math.sin(math.pi / shape.sides)
        return perimeter(shape) + inner
    return perimeter(shape)


def bounding_box(shape: ChannelShape) -> tuple[float, float, float, float]:
    """(xmin, xmax, ymin, ymax) covering the shape."""
    if isinstance(shape, Rectangle):
        w2, l2 = shape.width_um / 2.0, shape.length_um / 2.0
        return (-w2, w2, -l2, l2)
    r = shape.radius_um if isinstance(shape, RegularPolygon) else shape.outer_radius_um
    return (-r, r, -r, r)


def min_extent(shape: ChannelShape) -> float:
    """Smallest across-channel distance, used for step-size sanity warnings."""
    if isinstance(shape, Rectangle):
        return min(shape.width_um, shape.length_um)
    pack = edge_pack(shape)
    if pack.kind == KIND_RING:
        return pack.apothem - pack.inner_radius
    return 2.0 * pack.apothem


def contains(shape: ChannelShape, point, eps: float = GEOM_EPS) -> bool:
    """Closed containment test: boundary points are interior."""
    pack = edge_pack(shape)
    return bool(
        _kernels.contains_point(
            float(point[0]), float(point[1]), *pack.scalar_args, *pack.edge_args, eps
        )
    )


def contains_many(shape: ChannelShape, points: np.ndarray, eps: float = GEOM_EPS) -> np.ndarray:
    """Vectorized closed containment for an (N, 2) array of points."""
    pts = np.asarray(points, dtype=np.float64)
    pack = edge_pack(shape)
    out = np.empty(len(pts), dtype=np.bool_)
    _kernels.contains_points(pts, out, *pack.scalar_args, *pack.edge_args, eps)
    return out


def edges(shape: ChannelShape) -> list[BoundaryEdge]:
    """Explicit boundary chains as directed edges, outer chain first."""
    pack = edge_pack(shape)
    out = []
    for i in range(len(pack.length)):
        s = pack.start[i]
        # the end vertex is exactly the next edge's stored start
        e = pack.start[_next_edge_index(pack, i, +1)]
        out.append(
            BoundaryEdge(
                start=(float(s[0]), float(s[1])),
                end=(float(e[0]), float(e[1])),
                chain="outer" if pack.chain_id[i] == 0 else "inner",
                index=i,
            )
        )
    return out


def _next_edge_index(pack: EdgePack, i: int, direction: int) -> int:
    c = pack.chain_id[i]
    lo, hi = pack.chain_ptr[c], pack.chain_ptr[c + 1]
    return lo + (i - lo + direction) % (hi - lo)


def first_exit(shape: ChannelShape, frm, to, eps: float = GEOM_EPS) -> Optional[ExitHit]:
    """First boundary edge crossed by the segment frm -> to, if any.

    Returns None when the open segment stays in the closed interior.  A start
    point already on an edge counts as a hit (travelled 0) only when the
    motion points outward through that edge.
    """
    pack = edge_pack(shape)
    idx, hx, hy, trav = _kernels.first_exit_hit(
        float(frm[0]), float(frm[1]), float(to[0]), float(to[1]), *pack.edge_args, eps
    )
    if idx < 0:
        return None
    return ExitHit(edge=edges(shape)[idx], point=(hx, hy), travelled=trav)


def shape_from_literal(d: dict) -> ChannelShape:
    """Parse the shape literal used in configuration files.

    {"kind":"rectangle","w":20,"l":20} | {"kind":"polygon","n":20,"r":25.57}
    | {"kind":"ring","n":20,"r_i":10,"r_o":25.57}, lengths in um.
    """
    try:
        kind = d["kind"]
        if kind == "rectangle":
            return Rectangle(width_um=float(d["w"]), length_um=float(d["l"]))
        if kind == "polygon":
            return RegularPolygon(sides=int(d["n"]), radius_um=float(d["r"]))
        if kind == "ring":
            return PolygonRing(
                sides=int(d["n"]),
                inner_radius_um=float(d["r_i"]),
                outer_radius_um=float(d["r_o"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed shape literal {d!r}: {exc}") from exc
    raise ConfigError(f"unknown shape kind {kind!r}")


def shape_to_literal(shape: ChannelShape) -> dict:
    if isinstance(shape, Rectangle):
        return {"kind": "rectangle", "w": shape.width_um, "l": shape.length_um}
    if isinstance(shape, RegularPolygon):
        return {"kind": "polygon", "n": shape.sides, "r": shape.radius_um}
    return {
        "kind": "ring",
        "n": shape.sides,
        "r_i": shape.inner_radius_um,
        "r_o": shape.outer_radius_um,
    }
