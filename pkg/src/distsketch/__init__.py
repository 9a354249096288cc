"""Distance sketches over a deterministic message-passing simulator."""

from .graphs import GenerationError, GraphError, WeightedGraph, generate, load_edge_list, serialize
from .oracle import (
    DistanceTable,
    EmptyLevelError,
    LevelAssignment,
    all_pairs,
    centralized_tz,
    epsilon_far_pairs,
    hop_diameter,
    r_epsilon,
    shortest_path_diameter,
    sssp_exact,
)
from .protocol import BfsOverlay, termination_overlay
from .rng import Rng
from .sim import Envelope, NodeProcess, RoundLimitError, RunMetrics, Simulator, run
from .sketches import (
    CdgSketch,
    DensityNet,
    GdSketch,
    IncompatibleSketchError,
    SlackSketch3,
    TzLabel,
)
from .slack import (
    RetryBudgetError,
    build_cdg_sketches,
    build_density_net,
    build_slack3_sketches,
)
from .gd import build_gd_sketches, gd_level_params
from .query import (
    StretchReport,
    cdg_estimate,
    gd_estimate,
    slack3_estimate,
    stretch_report,
    tz_estimate,
)
from .tz import ResampleError, build_tz_sketches, sample_hierarchy

__version__ = "0.1.0"
