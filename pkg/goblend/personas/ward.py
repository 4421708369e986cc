"""Ward agglomerative clustering with Lance-Williams updates on squared Euclidean distances."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from goblend.errors import ClusteringError

logger = logging.getLogger(__name__)

MONOTONICITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Merge:
    cluster_a: int
    cluster_b: int
    height: float
    size: int


@dataclass
class Dendrogram:
    """n - 1 merges of n leaves; merge step s creates cluster id n + s."""
    n_leaves: int
    merges: List[Merge] = field(default_factory=list)

    @property
    def heights(self) -> np.ndarray:
        return np.array([m.height for m in self.merges], dtype=float)

    def leaf_order(self) -> List[int]:
        """Left-to-right leaf order of the tree, smaller child id first."""
        if not self.merges:
            return list(range(self.n_leaves))
        children = {self.n_leaves + s: (m.cluster_a, m.cluster_b) for s, m in enumerate(self.merges)}
        order: List[int] = []
        stack = [self.n_leaves + len(self.merges) - 1]
        while stack:
            node = stack.pop()
            if node < self.n_leaves:
                order.append(node)
            else:
                a, b = children[node]
                stack.extend((max(a, b), min(a, b)))
        return order

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "step": s,
                    "cluster_a": m.cluster_a,
                    "cluster_b": m.cluster_b,
                    "new_id": self.n_leaves + s,
                    "linkage_distance": m.height,
                    "merged_size": m.size,
                }
                for s, m in enumerate(self.merges)
            ],
            columns=["step", "cluster_a", "cluster_b", "new_id", "linkage_distance", "merged_size"],
        )


def squared_distances(vectors: np.ndarray) -> np.ndarray:
    diff = vectors[:, None, :] - vectors[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def ward_cluster(vectors: np.ndarray) -> Dendrogram:
    """Merge the pair with the smallest Ward dissimilarity until one cluster remains.

    Ties go to the pair with the lexicographically smallest (min id, max id).
    """
    x = np.asarray(vectors, dtype=float)
    if x.ndim != 2 or len(x) < 2:
        raise ClusteringError(f"need at least two vectors, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ClusteringError("vectors contain NaN or infinite values")

    n = len(x)
    dist = squared_distances(x)
    np.fill_diagonal(dist, np.inf)
    ids = np.arange(n)
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    dendrogram = Dendrogram(n_leaves=n)
    previous = 0.0

    for step in range(n - 1):
        masked = np.where(active[:, None] & active[None, :], dist, np.inf)
        best = masked.min()
        rows, cols = np.nonzero(masked == best)
        lo = np.minimum(ids[rows], ids[cols])
        hi = np.maximum(ids[rows], ids[cols])
        pick = np.lexsort((hi, lo))[0]
        i, j = int(rows[pick]), int(cols[pick])
        if ids[i] > ids[j]:
            i, j = j, i

        height = float(best)
        if height < previous - MONOTONICITY_TOLERANCE * max(1.0, previous):
            raise ClusteringError(f"Ward heights decreased at merge {step}: {height} < {previous}")
        previous = max(previous, height)

        ni, nj = sizes[i], sizes[j]
        dendrogram.merges.append(Merge(int(ids[i]), int(ids[j]), height, int(ni + nj)))

        # Lance-Williams update for Ward, slot i becomes the merged cluster
        nk = sizes
        total = ni + nj + nk
        updated = ((ni + nk) * dist[i] + (nj + nk) * dist[j] - nk * height) / total
        dist[i, :] = updated
        dist[:, i] = updated
        dist[i, i] = np.inf
        active[j] = False
        dist[j, :] = np.inf
        dist[:, j] = np.inf
        sizes[i] = ni + nj
        ids[i] = n + step

    logger.debug("Ward clustering of %d vectors, root height %.4f", n, previous)
    return dendrogram


def cut(dendrogram: Dendrogram, threshold: float) -> np.ndarray:
    """Cluster label per leaf: connected components of merges below the threshold.

    Labels are numbered in order of each cluster's first leaf.
    """
    if threshold <= 0:
        raise ValueError(f"cut threshold must be positive, got {threshold}")
    n = dendrogram.n_leaves
    parent = list(range(2 * n - 1))

    def find(node: int) -> int:
        while parent[node] != node:
            parent[node] = parent[parent[node]]
            node = parent[node]
        return node

    for step, merge in enumerate(dendrogram.merges):
        if merge.height < threshold:
            new_id = n + step
            parent[find(merge.cluster_a)] = new_id
            parent[find(merge.cluster_b)] = new_id

    labels = np.empty(n, dtype=int)
    numbering = {}
    for leaf in range(n):
        root = find(leaf)
        labels[leaf] = numbering.setdefault(root, len(numbering))
    return labels


def threshold_for_clusters(dendrogram: Dendrogram, k: int) -> float:
    """A cut threshold yielding exactly k clusters: midway between the deciding merge heights."""
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise ClusteringError(f"cannot make {k} clusters from {n} leaves")
    heights = np.sort(dendrogram.heights)
    if k == n:
        if heights[0] <= 0:
            raise ClusteringError("duplicate vectors: no threshold separates every leaf")
        return float(heights[0]) / 2.0
    if k == 1:
        return float(heights[-1]) * 1.5 + 1.0
    below, above = float(heights[n - k - 1]), float(heights[n - k])
    if not below < above:
        raise ClusteringError(f"merge heights tie at {below}; {k} clusters cannot be cut cleanly")
    return (below + above) / 2.0


def export_merges(dendrogram: Dendrogram, path: Union[str, Path]) -> Path:
    """Merge-list CSV for external plotting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dendrogram.to_frame().to_csv(path, index=False)
    return path
