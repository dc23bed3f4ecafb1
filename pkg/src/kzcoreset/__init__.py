"""Small weighted coresets for power-of-distance clustering costs.

Clients live in a Euclidean, explicit-matrix, or graph shortest-path metric;
a seeded bicriteria solution partitions them into rings and bands, and a few
hundred samples per group yield a reweighted subset whose clustering cost
tracks the input within a small relative error for every candidate solution.
"""

from .approx import ClusteringContext, build_context, dz_seed, local_search_refine
from .decompose import Decomposition, GroupEntry, classify, group_registry
from .errors import DomainError, InputError, InvariantError
from .evaluate import (
    EvalReport,
    distortion,
    gen_solutions,
    report_distortion,
    standard_panel,
    sweep,
    verify_event_E,
    verify_preprocess,
)
from .metric import (
    DistanceMatrixBackend,
    EuclideanBackend,
    GraphBackend,
    PointSet,
    Solution,
    point_cost,
    set_cost,
)
from .nets import build_candidates, greedy_net, snap_center, verify_centroid_property
from .pipeline import (
    Coreset,
    build,
    build_k2,
    compose,
    delta_heuristic,
    reduce_weighted,
)
from .sampler import group_sample, ring_uniform_sample, sensitivity_sample

__version__ = "0.1.0"

__all__ = [
    "ClusteringContext",
    "Coreset",
    "Decomposition",
    "DistanceMatrixBackend",
    "DomainError",
    "EuclideanBackend",
    "EvalReport",
    "GraphBackend",
    "GroupEntry",
    "InputError",
    "InvariantError",
    "PointSet",
    "Solution",
    "build",
    "build_candidates",
    "build_context",
    "build_k2",
    "classify",
    "compose",
    "delta_heuristic",
    "distortion",
    "dz_seed",
    "gen_solutions",
    "greedy_net",
    "group_registry",
    "group_sample",
    "local_search_refine",
    "point_cost",
    "reduce_weighted",
    "report_distortion",
    "ring_uniform_sample",
    "sensitivity_sample",
    "set_cost",
    "snap_center",
    "standard_panel",
    "sweep",
    "verify_centroid_property",
    "verify_event_E",
    "verify_preprocess",
]
