"""Analytical trip-rate model and closed-form channel-shape optimizers.

A single MT completes on average v_avg*T/P(g) trips per channel use, and a
channel of cross-section area A(g) holds A(g)*h*C microtubules, so the
expected trip total is T*v_avg*C*h*A(g)/P(g).  Maximizing throughput over a
shape family therefore maximizes the area-to-perimeter ratio subject to the
perimeter being coverable within one channel use, P(g) <= T*v_avg.  Each
family admits a closed-form optimum: the square among rectangles, and the
circle (r = T*v_avg / 2*pi, solid, i.e. r_i = 0) for regular polygons and
polygonal rings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ConfigError
from .geometry import (
    ChannelShape,
    PolygonRing,
    Rectangle,
    RegularPolygon,
    area,
    perimeter,
)

#: absolute feasibility tolerance on the perimeter constraint (um)
PERIMETER_TOL = 1e-9

#: polygon side count conventionally treated as a circle
DEFAULT_CIRCLE_SIDES = 20


@dataclass(frozen=True)
class TripModelParams:
    """Inputs of the total-trip estimate."""

    T_s: float
    v_avg_um_s: float
    concentration_per_fL: float
    height_um: float

    def __post_init__(self):
        if not (self.T_s > 0 and self.v_avg_um_s > 0 and self.height_um > 0):
            raise ConfigError("T, v_avg and height must be positive")
        if self.concentration_per_fL < 0:
            raise ConfigError("MT concentration must be >= 0")


@dataclass(frozen=True)
class OptimalShape:
    """A family optimum: the shape, its area/perimeter objective (um), and
    whether the perimeter constraint is active.

    For the unbounded-side families the true optimum is the circle; then
    ``circle_radius_um`` carries the exact circle radius, ``objective_um``
    is the exact circle value r/2, and ``shape`` is the polygonal
    representation whose perimeter matches the constraint.
    """

    shape: ChannelShape
    objective_um: float
    binding: bool
    circle_radius_um: Optional[float] = None


@dataclass(frozen=True)
class RankedShape:
    shape: ChannelShape
    objective_um: float
    feasible: bool


def expected_single_mt_trips(shape: ChannelShape, T_s: float, v_avg_um_s: float) -> float:
    """Mean trips of one MT in T seconds: one trip per perimeter covered."""
    P = perimeter(shape)
    if P <= 0:
        raise ConfigError("shape perimeter must be positive")
    return v_avg_um_s * T_s / P


def expected_total_trips(shape: ChannelShape, params: TripModelParams) -> float:
    """Mean total trips of all MTs: T*v*C*h*A/P.

    The MT count here is the continuous value A*h*C; the simulator floors
    it, and the validation harness reports that gap rather than hiding it.
    """
    return (params.T_s * params.v_avg_um_s * params.concentration_per_fL
            * params.height_um * area(shape) / perimeter(shape))


def optimize_rectangle(T_s: float, v_avg_um_s: float) -> OptimalShape:
    """Best rectangle: the square of side T*v/4 (constraint binding)."""
    budget = T_s * v_avg_um_s
    if budget <= 0:
        raise ConfigError("T*v_avg must be positive")
    side = 0.25 * budget
    return OptimalShape(
        shape=Rectangle(width_um=side, length_um=side),
        objective_um=side / 4.0,
        binding=True,
    )


def optimize_polygon(T_s: float, v_avg_um_s: float, n: Optional[int] = None,
                     n_repr: int = DEFAULT_CIRCLE_SIDES) -> OptimalShape:
    """Best regular polygon at fixed side count n, or over all n (n=None).

    Fixed n: radius T*v/(2n sin(pi/n)), objective 0.5 r cos(pi/n).  With n
    unbounded the optimum is the circle of radius T*v/(2 pi); the returned
    shape is the n_repr-gon whose perimeter equals the budget (both radii
    are reported since they differ slightly).
    """
    budget = T_s * v_avg_um_s
    if budget <= 0:
        raise ConfigError("T*v_avg must be positive")
    if n is not None:
        if n < 3:
            raise ConfigError("polygon side count must be >= 3")
        r = budget / (2.0 * n * math.sin(math.pi / n))
        return OptimalShape(
            shape=RegularPolygon(sides=n, radius_um=r),
            objective_um=0.5 * r * math.cos(math.pi / n),
            binding=True,
        )
    r_circle = budget / (2.0 * math.pi)
    r_repr = budget / (2.0 * n_repr * math.sin(math.pi / n_repr))
    return OptimalShape(
        shape=RegularPolygon(sides=n_repr, radius_um=r_repr),
        objective_um=0.5 * r_circle,
        binding=True,
        circle_radius_um=r_circle,
    )


def optimize_ring(T_s: float, v_avg_um_s: float,
                  n_repr: int = DEFAULT_CIRCLE_SIDES) -> OptimalShape:
    """Best polygonal ring: the hole vanishes (r_i = 0) and the problem
    reduces to the unbounded polygon, i.e. the solid circle."""
    poly = optimize_polygon(T_s, v_avg_um_s, n=None, n_repr=n_repr)
    rep = poly.shape
    return OptimalShape(
        shape=PolygonRing(sides=rep.sides, inner_radius_um=0.0,
                          outer_radius_um=rep.radius_um),
        objective_um=poly.objective_um,
        binding=True,
        circle_radius_um=poly.circle_radius_um,
    )


def rank_shapes(shapes: Sequence[ChannelShape], T_s: float,
                v_avg_um_s: float) -> list[RankedShape]:
    """Shapes ordered by descending area/perimeter; shapes whose perimeter
    exceeds T*v_avg are flagged infeasible but kept in the ranking."""
    budget = T_s * v_avg_um_s
    ranked = [
        RankedShape(
            shape=s,
            objective_um=area(s) / perimeter(s),
            feasible=perimeter(s) <= budget + PERIMETER_TOL,
        )
        for s in shapes
    ]
    ranked.sort(key=lambda e: -e.objective_um)
    return ranked
