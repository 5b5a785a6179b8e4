"""Synthetic instance generators with known ground truth, plus file I/O.

Dataset file format: a header line ``d n`` followed by n lines of d
space-separated decimal reals (17 significant digits on output). An optional
sidecar file ``<path>.gt`` lists one cluster id per point and ends with a
line ``phistar <value>``; reference centers are reconstructed as per-cluster
centroids on load.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import Dataset, GroundTruth, cost
from .sampling import TAG_GEN, RngStream

MAX_SQ_NORM_LOG10 = 300.0
WARN_SQ_NORM_LOG10 = 150.0


class ParseError(ValueError):
    """Malformed dataset or sidecar file; carries the offending line number."""

    def __init__(self, path, line: int, detail: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {detail}")


@dataclass
class LowerBoundParams:
    """Tiered orthogonal-axes instance that stalls oversampling.

    Apart from a heavy cluster of coincident points at the origin, each of
    the remaining k-1 points sits on its own axis; tier i (1-based) points
    have squared norm L^(2(T-i+1)), so tier costs form a steep geometric
    ladder and only about one tier per round can be cleared.
    """

    k: int
    L: float
    T: int
    origin_multiplicity: int | None = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if not self.L > 1:
            raise ValueError("L must be > 1")
        if self.T < 1 or self.T > self.k - 1:
            raise ValueError("T must satisfy 1 <= T <= k-1")
        if self.origin_multiplicity is None:
            self.origin_multiplicity = 9 * (self.k - 1)
        if self.origin_multiplicity < 1:
            raise ValueError("origin_multiplicity must be >= 1")
        log10_sq_norm = 2.0 * self.T * math.log10(self.L)
        if log10_sq_norm > MAX_SQ_NORM_LOG10:
            raise ValueError(
                f"largest squared norm L^(2T) = 10^{log10_sq_norm:.1f} exceeds "
                f"the 1e{MAX_SQ_NORM_LOG10:.0f} float64 safety bound"
            )
        if log10_sq_norm > WARN_SQ_NORM_LOG10:
            warnings.warn(
                f"largest squared norm L^(2T) = 10^{log10_sq_norm:.1f} is above "
                f"1e{WARN_SQ_NORM_LOG10:.0f}; expect reduced float precision",
                RuntimeWarning,
            )


def tier_sizes(k: int, T: int) -> list[int]:
    """Distribute the k-1 non-origin points over T tiers as evenly as
    possible, earlier (costlier) tiers taking the extras."""
    base, extra = divmod(k - 1, T)
    return [base + (1 if i < extra else 0) for i in range(T)]


def gen_lower_bound(p: LowerBoundParams) -> Dataset:
    d = p.k - 1
    rows = [np.zeros(d) for _ in range(p.origin_multiplicity)]
    partition = [0] * p.origin_multiplicity
    centers = [np.zeros(d)]
    axis = 0
    cluster = 1
    for i, size in enumerate(tier_sizes(p.k, p.T), start=1):
        coordinate = float(p.L) ** (p.T - i + 1)
        for _ in range(size):
            row = np.zeros(d)
            row[axis] = coordinate
            rows.append(row)
            centers.append(row.copy())
            partition.append(cluster)
            axis += 1
            cluster += 1
    gt = GroundTruth(np.array(partition), np.vstack(centers), 0.0)
    return Dataset(
        np.vstack(rows),
        ground_truth=gt,
        label=f"lower_bound_k{p.k}_L{p.L:g}_T{p.T}",
        metadata={"k": p.k, "L": p.L, "T": p.T,
                  "origin_multiplicity": p.origin_multiplicity},
    )


@dataclass
class SimplexParams:
    """Equal-size Gaussian clusters at the vertices of a scaled simplex."""

    k: int
    points_per_cluster: int
    scale: float = 1.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.points_per_cluster < 1:
            raise ValueError("points_per_cluster must be >= 1")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


def gen_simplex(p: SimplexParams, rng: RngStream) -> Dataset:
    n = p.k * p.points_per_cluster
    gen = rng.generator(TAG_GEN)
    points = np.zeros((n, p.k))
    partition = np.repeat(np.arange(p.k), p.points_per_cluster)
    for c in range(p.k):
        block = slice(c * p.points_per_cluster, (c + 1) * p.points_per_cluster)
        points[block, c] = p.scale
    if p.noise_sigma > 0:
        points += gen.normal(0.0, p.noise_sigma, size=points.shape)
    centers = np.vstack([
        points[partition == c].mean(axis=0) for c in range(p.k)
    ])
    phi_star = cost(points, centers)
    gt = GroundTruth(partition, centers, phi_star)
    return Dataset(
        points,
        ground_truth=gt,
        label=f"simplex_k{p.k}_m{p.points_per_cluster}_s{p.noise_sigma:g}",
        metadata={"k": p.k, "points_per_cluster": p.points_per_cluster,
                  "scale": p.scale, "noise_sigma": p.noise_sigma},
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_dataset(ds: Dataset, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{ds.dim} {ds.n}\n")
        for row in ds.points:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")
    if ds.ground_truth is not None:
        gt = ds.ground_truth
        with open(f"{path}.gt", "w") as fh:
            for cid in gt.partition:
                fh.write(f"{int(cid)}\n")
            fh.write(f"phistar {_fmt(gt.phi_star)}\n")


def _load_sidecar(path, n: int) -> GroundTruth | None:
    import os

    gt_path = f"{path}.gt"
    if not os.path.exists(gt_path):
        return None
    with open(gt_path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    while lines and lines[-1].strip() == "":
        lines.pop()
    if len(lines) != n + 1:
        raise ParseError(gt_path, len(lines) + 1,
                         f"expected {n} cluster ids plus a phistar line")
    ids = []
    for i, ln in enumerate(lines[:n], start=1):
        try:
            ids.append(int(ln.strip()))
        except ValueError:
            raise ParseError(gt_path, i, f"expected an integer cluster id, got {ln!r}")
    tokens = lines[n].split()
    if len(tokens) != 2 or tokens[0] != "phistar":
        raise ParseError(gt_path, n + 1, "expected `phistar <value>`")
    try:
        phi_star = float(tokens[1])
    except ValueError:
        raise ParseError(gt_path, n + 1, f"non-numeric phistar {tokens[1]!r}")
    return ids, phi_star  # centers reconstructed by the caller


def load_dataset(path, label: str | None = None) -> Dataset:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    while lines and lines[-1].strip() == "":
        lines.pop()
    if not lines:
        raise ParseError(path, 1, "empty file; expected header `d n`")
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError(path, 1, f"expected header `d n`, got {lines[0]!r}")
    try:
        d, n = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(path, 1, f"non-integer header fields {lines[0]!r}")
    if d < 1 or n < 1:
        raise ParseError(path, 1, f"header must have d >= 1 and n >= 1, got d={d} n={n}")
    if len(lines) - 1 < n:
        raise ParseError(path, len(lines) + 1,
                         f"expected {n} point rows, file ends after {len(lines) - 1}")
    if len(lines) - 1 > n:
        raise ParseError(path, n + 2, "unexpected content after the last point row")
    points = np.zeros((n, d))
    for i, ln in enumerate(lines[1:], start=2):
        tokens = ln.split()
        if len(tokens) != d:
            raise ParseError(path, i, f"expected {d} coordinates, got {len(tokens)}")
        try:
            points[i - 2] = [float(t) for t in tokens]
        except ValueError:
            raise ParseError(path, i, f"non-numeric coordinate in {ln!r}")
    sidecar = _load_sidecar(path, n)
    gt = None
    if sidecar is not None:
        ids, phi_star = sidecar
        partition = np.asarray(ids, dtype=np.int64)
        k = int(partition.max()) + 1 if len(partition) else 0
        if partition.min() < 0 or len(np.unique(partition)) != k:
            raise ParseError(f"{path}.gt", 1,
                             "cluster ids must cover 0..k-1 with no gaps")
        centers = np.vstack([
            points[partition == c].mean(axis=0) for c in range(k)
        ])
        gt = GroundTruth(partition, centers, phi_star)
    return Dataset(points, ground_truth=gt,
                   label=label if label is not None else str(path))
