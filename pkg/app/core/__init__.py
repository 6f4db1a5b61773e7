from .hyperbolic import (
    Chord,
    DiskPoint,
    MobiusMap,
    UnitTangent,
    apply_isometry,
    chord_intersection,
    flow,
    frame_map,
    hyperbolic_distance,
)

from .surface import (
    DeckWord,
    SurfaceSpec,
    build_bolza,
    contains,
    get_surface,
    liouville_sample,
    reduce,
    reduce_tangent,
)

from .tracer import GeodesicTrace, restrict, tangent_at, trace

from .intersections import (
    Crossing,
    CrossingSet,
    mutual_intersections,
    restrict_crossings,
    self_intersections,
    self_intersections_naive,
    weighted_counts,
)

from .kernels import (
    KernelConfig,
    build_localizer,
    build_mollifier,
    build_phi,
    eval_H,
    eval_K,
    eval_k_local,
    f_delta,
    kappa_phi,
    row_mean,
    sandwich,
    u_statistic,
)

from .utils import derive_seed, make_rng

__all__ = [
    "Chord",
    "DiskPoint",
    "MobiusMap",
    "UnitTangent",
    "apply_isometry",
    "chord_intersection",
    "flow",
    "frame_map",
    "hyperbolic_distance",
    "DeckWord",
    "SurfaceSpec",
    "build_bolza",
    "contains",
    "get_surface",
    "liouville_sample",
    "reduce",
    "reduce_tangent",
    "GeodesicTrace",
    "restrict",
    "tangent_at",
    "trace",
    "Crossing",
    "CrossingSet",
    "mutual_intersections",
    "restrict_crossings",
    "self_intersections",
    "self_intersections_naive",
    "weighted_counts",
    "KernelConfig",
    "build_localizer",
    "build_mollifier",
    "build_phi",
    "eval_H",
    "eval_K",
    "eval_k_local",
    "f_delta",
    "kappa_phi",
    "row_mean",
    "sandwich",
    "u_statistic",
    "derive_seed",
    "make_rng"
]
