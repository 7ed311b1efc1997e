"""kinesim: kinesin-driven microtubule transport channels.

Simulates particle transport by gliding microtubules in parametric channel
cross-sections, estimates the channel's delivery statistics and capacity,
and solves the constrained channel-shape optimization in closed form.
"""

from .errors import (
    ConfigError,
    DataIntegrityError,
    IncompleteDataError,
    KinesimError,
    ZoneCapacityError,
)
from .geometry import (
    BoundaryEdge,
    ChannelShape,
    PolygonRing,
    Rectangle,
    RegularPolygon,
    area,
    contains,
    edges,
    first_exit,
    perimeter,
    shape_from_literal,
    shape_to_literal,
    total_boundary_length,
)
from .infotheory import (
    CapacityResult,
    ConditionalPmf,
    blahut_arimoto,
    capacity_vs_xmax,
    estimate_pmf,
    mutual_information,
    read_pmf_json,
    write_pmf_json,
)
from .motility import (
    MotilityParams,
    MtPose,
    advance,
    initial_pose,
    sample_step,
    simulate_path,
)
from .optimizer import (
    OptimalShape,
    TripModelParams,
    expected_single_mt_trips,
    expected_total_trips,
    optimize_polygon,
    optimize_rectangle,
    optimize_ring,
    rank_shapes,
)
from .transport import (
    CargoState,
    ChannelUseResult,
    TripCounter,
    ZoneLayout,
    build_zones,
    mt_count_for,
    place_particles,
    run_channel_use,
    step_transport,
)
from .experiments import ExperimentConfig, TrialRecord, reproduce, run_trials

__version__ = "0.1.0"

__all__ = [
    "KinesimError", "ConfigError", "DataIntegrityError", "IncompleteDataError",
    "ZoneCapacityError",
    "Rectangle", "RegularPolygon", "PolygonRing", "ChannelShape",
    "BoundaryEdge", "area", "perimeter", "total_boundary_length", "contains",
    "edges", "first_exit", "shape_from_literal", "shape_to_literal",
    "MotilityParams", "MtPose", "sample_step", "advance", "simulate_path",
    "initial_pose",
    "ZoneLayout", "CargoState", "TripCounter", "ChannelUseResult",
    "build_zones", "place_particles", "step_transport", "run_channel_use",
    "mt_count_for",
    "ConditionalPmf", "CapacityResult", "estimate_pmf", "mutual_information",
    "blahut_arimoto", "capacity_vs_xmax", "read_pmf_json", "write_pmf_json",
    "TripModelParams", "OptimalShape", "expected_single_mt_trips",
    "expected_total_trips", "optimize_rectangle", "optimize_polygon",
    "optimize_ring", "rank_shapes",
    "ExperimentConfig", "TrialRecord", "run_trials", "reproduce",
    "__version__",
]
