"""K-means over (spatial, temporal) and agglomerative clustering over metric vectors.

Both algorithms sort their input by name before doing anything, so results do
not depend on input order; ties are broken by name, never by position.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class TooFewVectors(ValueError):
    code = "TooFewVectors"


class KTooLarge(ValueError):
    code = "KTooLarge"


@dataclass(frozen=True)
class FeatureVector:
    name: str
    features: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(float(f) for f in self.features))
        if any(math.isnan(f) for f in self.features):
            raise ValueError(f"{self.name}: missing feature value")


KMEANS_FEATURES = ("spatial", "temporal")
HIER_FEATURES = ("temporal", "mpki", "lfmr", "ai", "lfmr_slope")


def as_vectors(vectors) -> list[FeatureVector]:
    out = []
    for i, v in enumerate(vectors):
        out.append(v if isinstance(v, FeatureVector) else FeatureVector(f"v{i:05d}", tuple(v)))
    dims = {len(v.features) for v in out}
    if len(dims) > 1:
        raise ValueError("feature vectors differ in dimensionality")
    if len({v.name for v in out}) != len(out):
        raise ValueError("feature vector names must be unique")
    return out


def standardize(vectors) -> list[FeatureVector]:
    """Per-dimension z-scores with the population standard deviation.

    A zero-variance dimension maps to 0 everywhere. Sums use ``math.fsum`` so
    the result is independent of input order.
    """
    vecs = as_vectors(vectors)
    if len(vecs) < 2:
        raise TooFewVectors("standardize needs at least two vectors")
    n = len(vecs)
    cols = list(zip(*(v.features for v in vecs)))
    scaled_cols = []
    for col in cols:
        mean = math.fsum(col) / n
        sd = math.sqrt(math.fsum((x - mean) ** 2 for x in col) / n)
        if sd <= 1e-12 * max(1.0, abs(mean)):
            scaled_cols.append([0.0] * n)
        else:
            scaled_cols.append([(x - mean) / sd for x in col])
    return [FeatureVector(v.name, tuple(row)) for v, row in zip(vecs, zip(*scaled_cols))]


# k-means ------------------------------------------------------------------


@dataclass
class KMeansResult:
    names: list[str]
    assignments: list[int]  # aligned with the input order
    centroids: np.ndarray
    inertia: float
    iterations: int
    history: list[float] = field(default_factory=list)  # inertia after each assignment step

    def by_name(self) -> dict[str, int]:
        return dict(zip(self.names, self.assignments))

    def groups(self) -> list[list[str]]:
        out: dict[int, list[str]] = {}
        for name, a in sorted(zip(self.names, self.assignments)):
            out.setdefault(a, []).append(name)
        return [out[k] for k in sorted(out)]

    def to_dict(self) -> dict:
        return {
            "assignments": {n: a for n, a in sorted(self.by_name().items())},
            "centroids": self.centroids.tolist(),
            "inertia": self.inertia,
            "iterations": self.iterations,
        }


def _seed_plusplus(X, k, rng):
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    d2 = ((X - X[centers[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            left = [i for i in range(n) if i not in centers]
            idx = int(rng.choice(left))
        centers.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return X[centers].copy()


def _lloyd(X, C, max_iter, tol):
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        dist = d2[np.arange(X.shape[0]), assign]
        history.append(float(dist.sum()))
        new = C.copy()
        for j in range(C.shape[0]):
            members = X[assign == j]
            if len(members):
                new[j] = members.mean(axis=0)
            else:
                far = int(dist.argmax())
                new[j] = X[far]
                dist[far] = 0.0
        shift = float(np.sqrt(((new - C) ** 2).sum(axis=1)).max())
        C = new
        if shift < tol:
            break
    d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    inertia = float(d2[np.arange(X.shape[0]), assign].sum())
    history.append(inertia)
    return assign, C, inertia, it, history


def kmeans(
    vectors,
    k: int,
    seed: int = 0,
    max_iter: int = 100,
    tol: float = 1e-9,
    init: str = "k-means++",
    n_init: int = 10,
) -> KMeansResult:
    """Lloyd's algorithm; best of ``n_init`` seeded restarts by inertia.

    Cluster ids are renumbered by first appearance in name order.
    """
    vecs = as_vectors(vectors)
    n = len(vecs)
    if k < 1 or k > n:
        raise KTooLarge(f"k={k} not in [1, {n}]")
    order = sorted(range(n), key=lambda i: vecs[i].name)
    X = np.array([vecs[i].features for i in order], dtype=float)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, n_init)):
        if init == "k-means++":
            C0 = _seed_plusplus(X, k, rng)
        elif init == "random":
            C0 = X[rng.choice(n, size=k, replace=False)].copy()
        else:
            raise ValueError(f"unknown init {init!r}")
        res = _lloyd(X, C0, max_iter, tol)
        if best is None or res[2] < best[2] - 1e-12:
            best = res
    assign, C, inertia, iters, history = best
    remap: dict[int, int] = {}
    for a in assign:
        remap.setdefault(int(a), len(remap))
    canon = [remap[int(a)] for a in assign]
    used = sorted(remap, key=remap.get)
    centroids = C[used]
    sorted_assign = dict(zip(order, canon))
    return KMeansResult(
        names=[v.name for v in vecs],
        assignments=[sorted_assign[i] for i in range(n)],
        centroids=centroids,
        inertia=inertia,
        iterations=iters,
        history=history,
    )


# hierarchical ----------------------------------------------------------------

LINKAGES = ("average", "single", "complete")
_TIE = 1e-12


@dataclass
class Dendrogram:
    labels: list[str]  # leaf i has label labels[i]; leaves are in name order
    merges: list[tuple[int, int, float]]  # node n+j is created by merges[j]
    linkage: str = "average"

    @property
    def n(self) -> int:
        return len(self.labels)

    def members(self, node: int) -> list[int]:
        if node < self.n:
            return [node]
        a, b, _ = self.merges[node - self.n]
        return sorted(self.members(a) + self.members(b))

    def height(self, node: int) -> float:
        return 0.0 if node < self.n else self.merges[node - self.n][2]

    def is_monotone(self) -> bool:
        d = [m[2] for m in self.merges]
        return all(b >= a - _TIE * max(1.0, abs(a)) for a, b in zip(d, d[1:]))

    def clusters(self, k: int) -> list[list[str]]:
        """Leaf-label groups obtained by undoing the last ``k - 1`` merges."""
        if not 1 <= k <= self.n:
            raise ValueError("k out of range")
        roots = {2 * self.n - 2} if self.n > 1 else {0}
        for j in range(len(self.merges) - 1, len(self.merges) - k, -1):
            node = self.n + j
            roots.discard(node)
            a, b, _ = self.merges[j]
            roots.update((a, b))
        groups = [[self.labels[i] for i in self.members(r)] for r in roots]
        return sorted(groups)

    def to_dict(self) -> dict:
        return {
            "linkage": self.linkage,
            "labels": list(self.labels),
            "merges": [[a, b, d] for a, b, d in self.merges],
        }

    def to_newick(self) -> str:
        def name(label: str) -> str:
            if any(c in label for c in " ():;,[]'\t\n"):
                return "'" + label.replace("'", "''") + "'"
            return label

        def render(node: int, parent_h: float) -> str:
            bl = f"{parent_h - self.height(node):.10g}"
            if node < self.n:
                return f"{name(self.labels[node])}:{bl}"
            a, b, h = self.merges[node - self.n]
            return f"({render(a, h)},{render(b, h)}):{bl}"

        if self.n == 1:
            return name(self.labels[0]) + ";"
        a, b, h = self.merges[-1]
        return f"({render(a, h)},{render(b, h)});"


def _euclid(a: Sequence[float], b: Sequence[float]) -> float:
    return math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b)))


def hierarchical(vectors, linkage: str = "average") -> Dendrogram:
    """Agglomerative clustering with Euclidean base distance.

    Equal linkage distances (within 1e-12 relative) are resolved by the
    smallest leaf label of each cluster, lexicographically.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"linkage must be one of {LINKAGES}")
    vecs = sorted(as_vectors(vectors), key=lambda v: v.name)
    n = len(vecs)
    if n < 2:
        raise TooFewVectors("hierarchical clustering needs at least two vectors")
    # cluster id -> (size, smallest leaf index); distances keyed by frozen pairs
    size = {i: 1 for i in range(n)}
    key = {i: i for i in range(n)}
    acc: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            acc[(i, j)] = _euclid(vecs[i].features, vecs[j].features)

    def dist(a: int, b: int) -> float:
        v = acc[(a, b) if a < b else (b, a)]
        return v / (size[a] * size[b]) if linkage == "average" else v

    active = list(range(n))
    merges = []
    for step in range(n - 1):
        best = None
        for x in range(len(active)):
            for y in range(x + 1, len(active)):
                a, b = active[x], active[y]
                d = dist(a, b)
                tie_key = tuple(sorted((key[a], key[b])))
                if best is None or d < best[0] - _TIE * max(1.0, abs(best[0])):
                    best = (d, tie_key, a, b)
                elif abs(d - best[0]) <= _TIE * max(1.0, abs(best[0])) and tie_key < best[1]:
                    best = (d, tie_key, a, b)
        d, _, a, b = best
        if key[b] < key[a]:
            a, b = b, a
        new = n + step
        merges.append((a, b, d))
        size[new] = size[a] + size[b]
        key[new] = min(key[a], key[b])
        active.remove(a)
        active.remove(b)
        for c in active:
            ra = acc[(a, c) if a < c else (c, a)]
            rb = acc[(b, c) if b < c else (c, b)]
            if linkage == "average":
                v = ra + rb
            elif linkage == "single":
                v = min(ra, rb)
            else:
                v = max(ra, rb)
            acc[(c, new)] = v
        active.append(new)
    return Dendrogram([v.name for v in vecs], merges, linkage)
