"""k-means|| overseeding: sampling pipeline, distributed-round simulator,
instance generators, and statistical diagnostics."""

from .geometry import (
    CenterSet,
    CostCache,
    Dataset,
    GroundTruth,
    assign_nearest,
    centroid,
    cost,
)
from .instances import (
    LowerBoundParams,
    SimplexParams,
    gen_lower_bound,
    gen_simplex,
    load_dataset,
    save_dataset,
)
from .overseed import (
    OverseedConfig,
    OverseedResult,
    kmeans_parallel,
    overseed,
    weigh_centers,
)
from .sampling import RngStream, bernoulli_round, d2_distribution, sample_d2, sample_uniform
from .seeding import WeightedInstance, kmeanspp, lloyd

__all__ = [
    "CenterSet", "CostCache", "Dataset", "GroundTruth", "assign_nearest",
    "centroid", "cost", "LowerBoundParams", "SimplexParams", "gen_lower_bound",
    "gen_simplex", "load_dataset", "save_dataset", "OverseedConfig",
    "OverseedResult", "kmeans_parallel", "overseed", "weigh_centers",
    "RngStream", "bernoulli_round", "d2_distribution", "sample_d2",
    "sample_uniform", "WeightedInstance", "kmeanspp", "lloyd",
]
