"""Stochastic microtubule head motion with boundary following.

Per time step the head turns by a Gaussian angle increment and advances by a
Gaussian step length along the new heading.  Hitting a wall clips the step at
the boundary, bends the heading onto the nearest boundary direction, and
spends the remaining distance sliding along the boundary chain, wrapping
corners; wall contact keeps realigning the heading with the travel direction
(the filament body lies along the wall) until a freshly sampled heading
points strictly into the interior, at which point the MT glides free again.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import ConfigError
from .geometry import GEOM_EPS, ChannelShape, bounding_box, edge_pack, min_extent

#: experimentally motivated defaults (um, s)
DEFAULT_DT_S = 0.1
DEFAULT_V_AVG_UM_S = 0.5
DEFAULT_DIFFUSION_UM2_S = 2.0e-3
DEFAULT_PERSISTENCE_UM = 111.0


@dataclass(frozen=True)
class MotilityParams:
    """Time step, mean speed, diffusion coefficient and trajectory
    persistence length of the gliding motion.

    diffusion may be 0 and persistence may be inf: those degenerate values
    give deterministic straight motion and are used by validation runs.
    """

    dt_s: float = DEFAULT_DT_S
    v_avg_um_s: float = DEFAULT_V_AVG_UM_S
    diffusion_um2_s: float = DEFAULT_DIFFUSION_UM2_S
    persistence_um: float = DEFAULT_PERSISTENCE_UM

    def __post_init__(self):
        if not (self.dt_s > 0 and self.v_avg_um_s > 0):
            raise ConfigError("dt and v_avg must be positive")
        if self.diffusion_um2_s < 0:
            raise ConfigError("diffusion coefficient must be >= 0")
        if not self.persistence_um > 0:
            raise ConfigError("persistence length must be positive (inf allowed)")

    @property
    def step_mean_um(self) -> float:
        return self.v_avg_um_s * self.dt_s

    @property
    def step_std_um(self) -> float:
        return math.sqrt(2.0 * self.diffusion_um2_s * self.dt_s)

    @property
    def turn_std_rad(self) -> float:
        if math.isinf(self.persistence_um):
            return 0.0
        return math.sqrt(self.v_avg_um_s * self.dt_s / self.persistence_um)


@dataclass(frozen=True)
class MtPose:
    """One MT head: position, heading, and wall-contact state.

    While ``wall_edge >= 0`` the MT slides along that boundary edge with
    chain-traversal sign ``wall_along`` and ``heading_rad`` equals the
    direction of travel along the wall; the next turn increment is applied
    on top of it.
    """

    x_um: float
    y_um: float
    heading_rad: float
    wall_edge: int = -1
    wall_along: int = 1

    @property
    def position(self) -> tuple[float, float]:
        return (self.x_um, self.y_um)

    @property
    def wall_mode(self) -> str:
        return "free" if self.wall_edge < 0 else "following"


def check_step_scale(shape: ChannelShape, params: MotilityParams) -> None:
    """Warn when the mean step is large relative to the channel."""
    extent = min_extent(shape)
    if params.step_mean_um > 0.1 * extent:
        warnings.warn(
            f"mean step {params.step_mean_um:.3g} um exceeds 10% of the "
            f"smallest channel extent {extent:.3g} um; the boundary "
            f"interaction will be poorly resolved",
            stacklevel=2,
        )


def sample_step(params: MotilityParams, rng: np.random.Generator) -> tuple[float, float]:
    """Draw one (step length, turn angle) pair.

    Consumes exactly two standard normals, step length first.  The step
    length is NOT truncated here; ``advance`` clamps negative draws to zero.
    """
    z1 = rng.standard_normal()
    z2 = rng.standard_normal()
    dr = params.step_mean_um + params.step_std_um * z1
    dtheta = params.turn_std_rad * z2
    return dr, dtheta


def initial_pose(shape: ChannelShape, rng: np.random.Generator) -> MtPose:
    """Uniform position over the cross-section, uniform heading."""
    pack = edge_pack(shape)
    xmin, xmax, ymin, ymax = bounding_box(shape)
    x, y, th = _kernels.sample_pose(
        rng, xmin, xmax, ymin, ymax, *pack.scalar_args, *pack.edge_args, GEOM_EPS
    )
    return MtPose(x_um=x, y_um=y, heading_rad=th)


def advance(shape: ChannelShape, pose: MtPose, params: MotilityParams,
            rng: np.random.Generator) -> MtPose:
    """Advance one step; consumes exactly two Gaussian variates."""
    pack = edge_pack(shape)
    x, y, th, wedge, walong, _ = _kernels.advance_step(
        rng, pose.x_um, pose.y_um, pose.heading_rad,
        pose.wall_edge, pose.wall_along,
        *pack.scalar_args, *pack.edge_args,
        params.step_mean_um, params.step_std_um, params.turn_std_rad, GEOM_EPS,
    )
    return replace(pose, x_um=x, y_um=y, heading_rad=th,
                   wall_edge=int(wedge), wall_along=int(walong))


def advance_with_travel(shape: ChannelShape, pose: MtPose, params: MotilityParams,
                        rng: np.random.Generator) -> tuple[MtPose, float]:
    """Like ``advance`` but also reports the distance actually travelled,
    which equals the sampled step length (or 0 for a negative draw)."""
    pack = edge_pack(shape)
    x, y, th, wedge, walong, travelled = _kernels.advance_step(
        rng, pose.x_um, pose.y_um, pose.heading_rad,
        pose.wall_edge, pose.wall_along,
        *pack.scalar_args, *pack.edge_args,
        params.step_mean_um, params.step_std_um, params.turn_std_rad, GEOM_EPS,
    )
    new = replace(pose, x_um=x, y_um=y, heading_rad=th,
                  wall_edge=int(wedge), wall_along=int(walong))
    return new, travelled


def simulate_path(shape: ChannelShape, start: MtPose, params: MotilityParams,
                  n_steps: int, rng: np.random.Generator) -> list[MtPose]:
    """Sequence of n_steps+1 poses including the start; deterministic for a
    given generator state."""
    if n_steps < 0:
        raise ConfigError("n_steps must be >= 0")
    check_step_scale(shape, params)
    path = [start]
    pose = start
    for _ in range(n_steps):
        pose = advance(shape, pose, params, rng)
        path.append(pose)
    return path


def dump_path_csv(path: list[MtPose], fileobj, dt_s: float) -> None:
    """Write a path as CSV rows step,t_s,x_um,y_um,theta_rad,wall_mode."""
    writer = csv.writer(fileobj)
    writer.writerow(["step", "t_s", "x_um", "y_um", "theta_rad", "wall_mode"])
    for i, p in enumerate(path):
        writer.writerow([i, i * dt_s, repr(p.x_um), repr(p.y_um),
                         repr(p.heading_rad), p.wall_mode])
