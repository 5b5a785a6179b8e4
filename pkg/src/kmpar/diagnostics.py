"""Ground-truth-aware instrumentation and statistical verifiers.

Covers settled-cluster tracking (a reference cluster is settled once its
current cost is within a factor 10 of its reference cost), the
light/heavy/massive cost classification of unsettled clusters, Monte-Carlo
verifiers for the seeding expectation bounds, and a brute-force optimum
oracle for tiny instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    CenterSet,
    CostCache,
    Dataset,
    GroundTruth,
    as_points,
    centroid,
    cost,
    exact_sum,
    sq_dists,
)
from .overseed import TraceExtras
from .sampling import TAG_TRIAL, DegenerateDistribution, RngStream, oversample_mask

SETTLED_FACTOR = 10.0
BRUTE_FORCE_MAX_N = 12
BRUTE_FORCE_MAX_K = 4


@dataclass
class ClusterStat:
    cluster: int
    cost_current: float   # cost of the cluster under the working centers
    cost_optimal: float   # cost of the cluster under the reference centers
    settled: bool


@dataclass
class SettledReport:
    clusters: list[ClusterStat]
    phi_u: float          # total cost of unsettled clusters
    k_unsettled: int


def _pts(A) -> np.ndarray:
    return A.points if isinstance(A, Dataset) else as_points(A)


def cluster_reference_costs(X: Dataset) -> np.ndarray:
    """Per-cluster cost under the reference centers, cached on the dataset."""
    gt = X.ground_truth
    if gt is None:
        raise ValueError("dataset has no ground truth")
    if gt._cluster_opt_costs is None:
        cache = CostCache(X.points, gt.centers)
        gt._cluster_opt_costs = np.bincount(
            gt.partition, weights=cache.nearest_sq_dist, minlength=gt.k)
    return gt._cluster_opt_costs


def settled_report_from_costs(X: Dataset, per_point_costs: np.ndarray) -> SettledReport:
    gt = X.ground_truth
    if gt is None:
        raise ValueError("dataset has no ground truth")
    opt = cluster_reference_costs(X)
    cur = np.bincount(gt.partition, weights=per_point_costs, minlength=gt.k)
    stats = []
    unsettled_costs = []
    for a in range(gt.k):
        settled = cur[a] <= SETTLED_FACTOR * opt[a]
        stats.append(ClusterStat(a, float(cur[a]), float(opt[a]), bool(settled)))
        if not settled:
            unsettled_costs.append(float(cur[a]))
    return SettledReport(stats, exact_sum(unsettled_costs), len(unsettled_costs))


def settled_report(X: Dataset, C) -> SettledReport:
    cache = CostCache(X.points, C)
    return settled_report_from_costs(X, cache.nearest_sq_dist)


@dataclass
class ClusterClassification:
    """Tags for unsettled clusters: light / heavy / massive by cost share."""

    tags: dict[int, str]
    alpha: float                 # cost share of light clusters within phi_u
    heavy_threshold: float
    massive_threshold: float

    def count(self, tag: str) -> int:
        return sum(1 for t in self.tags.values() if t == tag)


def classify(report: SettledReport, k: int, gamma: float | None,
             heavy_threshold: float | None = None) -> ClusterClassification:
    """Classify unsettled clusters by cost.

    heavy: cost at least phi_u / k (or the supplied threshold, e.g.
    phi_u / (2k)); massive: heavy with cost at least
    (log2 gamma)^(1/10) * phi_u / k. With gamma unknown or degenerate no
    cluster is massive. Empty classification when phi_u is zero.
    """
    if report.phi_u <= 0.0:
        return ClusterClassification({}, 0.0, 0.0, math.inf)
    if heavy_threshold is None:
        heavy_threshold = report.phi_u / k
    if gamma is not None and math.isfinite(gamma) and gamma > 1.0:
        zeta = (math.log2(gamma) ** 0.1) * report.phi_u / k
    else:
        zeta = math.inf
    tags: dict[int, str] = {}
    light_costs = []
    for st in report.clusters:
        if st.settled:
            continue
        if st.cost_current >= heavy_threshold:
            tags[st.cluster] = "massive" if st.cost_current >= zeta else "heavy"
        else:
            tags[st.cluster] = "light"
            light_costs.append(st.cost_current)
    alpha = exact_sum(light_costs) / report.phi_u
    return ClusterClassification(tags, alpha, heavy_threshold, zeta)


@dataclass
class VerifierReport:
    name: str
    empirical: float
    bound: float
    sigma: float
    trials: int
    passed: bool

    def as_text(self) -> str:
        return (
            f"name {self.name}\n"
            f"empirical {self.empirical!r}\n"
            f"bound {self.bound!r}\n"
            f"sigma {self.sigma!r}\n"
            f"trials {self.trials}\n"
            f"pass {'true' if self.passed else 'false'}\n"
        )


def _single_center_costs(A: np.ndarray) -> np.ndarray:
    """cost of A under each candidate single center drawn from A itself."""
    return np.array([float(np.sum(sq_dists(A, A[p]))) for p in range(A.shape[0])])


def exact_uniform_mean(A) -> float:
    """Enumerated expectation of the cost after one uniform draw from A."""
    A = _pts(A)
    return float(_single_center_costs(A).mean())


def verify_uniform_lemma(A, trials: int, rng: RngStream) -> VerifierReport:
    """Monte-Carlo check that one uniformly drawn point p keeps
    E[cost(A, {p})] within twice the centroid cost."""
    A = _pts(A)
    per_candidate = _single_center_costs(A)
    bound = 2.0 * cost(A, [centroid(A)])
    gen = rng.generator(TAG_TRIAL)
    samples = per_candidate[gen.integers(0, A.shape[0], trials)]
    empirical = float(samples.mean())
    sigma = float(samples.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return VerifierReport("uniform_lemma", empirical, bound, sigma, trials,
                          empirical <= bound + 4.0 * sigma)


def _union_costs(A: np.ndarray, base: np.ndarray) -> np.ndarray:
    """cost of A under C union {p} for each candidate p in A, where base is
    the per-point cost of A under C alone."""
    return np.array([
        float(np.sum(np.minimum(base, sq_dists(A, A[p]))))
        for p in range(A.shape[0])
    ])


def exact_d2_mean(A, C) -> float:
    """Enumerated expectation of cost(A, C+{p}) for p cost-proportionally
    drawn from A."""
    A = _pts(A)
    base = CostCache(A, C).nearest_sq_dist
    total = exact_sum(base)
    if not total > 0.0:
        raise DegenerateDistribution("cluster already has zero cost")
    return float(np.dot(base / total, _union_costs(A, base)))


def verify_d2_lemma(A, C, trials: int, rng: RngStream) -> VerifierReport:
    """Monte-Carlo check that a cost-proportionally drawn point p keeps
    E[cost(A, C+{p})] within eight times the centroid cost."""
    A = _pts(A)
    base = CostCache(A, C).nearest_sq_dist
    total = exact_sum(base)
    if not total > 0.0:
        raise DegenerateDistribution("cluster already has zero cost")
    union = _union_costs(A, base)
    bound = 8.0 * cost(A, [centroid(A)])
    gen = rng.generator(TAG_TRIAL)
    idx = gen.choice(A.shape[0], size=trials, p=base / total)
    samples = union[idx]
    empirical = float(samples.mean())
    sigma = float(samples.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return VerifierReport("d2_lemma", empirical, bound, sigma, trials,
                          empirical <= bound + 4.0 * sigma)


def verify_settling_bound(X: Dataset, C: CenterSet, cluster: int, ell: float,
                          trials: int, rng: RngStream) -> VerifierReport:
    """Repeat single oversampling rounds and check that the frequency of the
    chosen cluster staying unsettled is at most exp(-ell*cost_A/(5*cost_X))."""
    gt = X.ground_truth
    if gt is None:
        raise ValueError("dataset has no ground truth")
    cache = CostCache(X.points, C)
    mask_a = gt.partition == cluster
    base_a = cache.nearest_sq_dist[mask_a]
    pts_a = X.points[mask_a]
    phi_a = exact_sum(base_a)
    phi_x = cache.total_cost
    opt_a = float(cluster_reference_costs(X)[cluster])
    if phi_a <= SETTLED_FACTOR * opt_a:
        raise ValueError("chosen cluster is already settled")
    bound = math.exp(-ell * phi_a / (5.0 * phi_x))
    trial_rng = rng.child(TAG_TRIAL)
    indices = np.arange(len(X))
    not_settled = 0
    for t in range(trials):
        sel = oversample_mask(cache.nearest_sq_dist, phi_x, ell, t, trial_rng,
                              indices)
        new_a = base_a
        for s in X.points[sel]:
            new_a = np.minimum(new_a, sq_dists(pts_a, s))
        if float(np.sum(new_a)) > SETTLED_FACTOR * opt_a:
            not_settled += 1
    freq = not_settled / trials
    sigma = math.sqrt(freq * (1.0 - freq) / trials)
    return VerifierReport(f"settling_lemma_cluster{cluster}", freq, bound,
                          sigma, trials, freq <= bound + 4.0 * sigma)


def settling_battery() -> list[dict]:
    """Five fixed (dataset, centers, target cluster) configurations whose
    total cost is far above the reference optimum, for the settling-rate
    verifier."""
    configs = []
    specs = [
        (3, 8.0, 0.5, 2),
        (3, 12.0, 0.5, 1),
        (4, 10.0, 0.5, 3),
        (5, 10.0, 0.4, 2),
        (5, 14.0, 0.6, 4),
    ]
    for k, spread, delta, target in specs:
        rows = []
        partition = []
        for j in range(k):
            cx = j * spread
            for dx, dy in ((delta, 0.0), (-delta, 0.0), (0.0, delta), (0.0, -delta)):
                rows.append([cx + dx, dy])
                partition.append(j)
        points = np.array(rows)
        centers = np.vstack([points[np.array(partition) == j].mean(axis=0)
                             for j in range(k)])
        gt_cost = cost(points, centers)
        ds = Dataset(points,
                     ground_truth=GroundTruth(np.array(partition), centers, gt_cost),
                     label=f"settling_k{k}_d{spread:g}")
        working = CenterSet.from_array(points[2:3], rounds=[0], sources=[2])
        configs.append({"dataset": ds, "centers": working, "cluster": target,
                        "ell": float(k)})
    return configs


def brute_force_optimal(X, k: int):
    """Exact optimum by enumerating all partitions into at most k parts.

    Searches with the incremental variance identity (block cost equals
    sum of squares minus squared block sum over the count) and reports the
    standard nearest-center cost of the winning centroids. Refuses instances
    beyond n=12 or k=4.
    """
    pts = _pts(X)
    n, d = pts.shape
    if n > BRUTE_FORCE_MAX_N or k > BRUTE_FORCE_MAX_K:
        raise ValueError(
            f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, k <= {BRUTE_FORCE_MAX_K}")
    if k < 1:
        raise ValueError("k must be >= 1")
    rows = [tuple(float(v) for v in p) for p in pts]
    sumsq = [sum(v * v for v in row) for row in rows]
    counts = [0] * k
    sums = [[0.0] * d for _ in range(k)]
    sqs = [0.0] * k
    bcost = [0.0] * k
    assign = [0] * n
    best = {"cost": math.inf, "assign": None}

    def block_cost(b):
        if counts[b] == 0:
            return 0.0
        s = sums[b]
        return sqs[b] - sum(v * v for v in s) / counts[b]

    def rec(i, nblocks, cur):
        if cur >= best["cost"]:
            return
        if i == n:
            best["cost"] = cur
            best["assign"] = assign.copy()
            return
        row = rows[i]
        limit = min(nblocks + 1, k)
        for b in range(limit):
            saved = (counts[b], sums[b], sqs[b], bcost[b])
            counts[b] += 1
            sums[b] = [s + r for s, r in zip(sums[b], row)]
            sqs[b] += sumsq[i]
            new = block_cost(b)
            bcost[b] = new
            assign[i] = b
            rec(i + 1, max(nblocks, b + 1), cur + (new - saved[3]))
            counts[b], sums[b], sqs[b], bcost[b] = saved

    rec(0, 0, 0.0)
    labels = np.array(best["assign"])
    used = np.unique(labels)
    centers = np.vstack([pts[labels == b].mean(axis=0) for b in used])
    phi = cost(pts, centers)
    return CenterSet.from_array(centers), phi


def gamma_of(X: Dataset, phi_star: float | None = None) -> float | None:
    """Spread ratio: cost under the single best center over the optimal cost.

    None (undefined) when the optimal cost is zero; round-complexity
    experiments use rounds-to-zero-cost instead in that regime.
    """
    if phi_star is None:
        if X.ground_truth is None:
            raise ValueError("need ground truth or an explicit phi_star")
        phi_star = X.ground_truth.phi_star
    numerator = cost(X.points, [centroid(X.points)])
    if phi_star == 0.0:
        return None
    return numerator / phi_star


class GroundTruthTracer:
    """Overseed tracer computing settled/classification fields per round.

    Keeps (round_index, SettledReport, total_cost) history so experiments
    can extract per-round unsettled-cost ratios afterwards.
    """

    def __init__(self, X: Dataset, k: int, gamma: float | str | None = "auto",
                 heavy_threshold_divisor: float = 1.0):
        if X.ground_truth is None:
            raise ValueError("tracer requires a dataset with ground truth")
        self.X = X
        self.k = k
        self.gamma = gamma_of(X) if gamma == "auto" else gamma
        self.heavy_threshold_divisor = heavy_threshold_divisor
        self.history: list[tuple[int, SettledReport, float]] = []

    def __call__(self, round_index: int, centers, per_point_costs,
                 total: float) -> TraceExtras:
        report = settled_report_from_costs(self.X, per_point_costs)
        self.history.append((round_index, report, total))
        if report.phi_u <= 0.0:
            return TraceExtras(0.0, 0, 0.0, 0, 0)
        threshold = None
        if self.heavy_threshold_divisor != 1.0:
            threshold = report.phi_u / (self.heavy_threshold_divisor * self.k)
        cls = classify(report, self.k, self.gamma, heavy_threshold=threshold)
        return TraceExtras(report.phi_u, report.k_unsettled, cls.alpha,
                           cls.count("heavy") + cls.count("massive"),
                           cls.count("massive"))
