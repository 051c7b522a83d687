"""Random-forest regressor whose per-tree spread doubles as a confidence score.

Trees are greedy CART with variance reduction. Every source of randomness
(bootstrap draw, per-node feature subsample) comes from a per-tree stream
seeded by ``(seed, tree_index)``, so a forest is bit-identical whatever the
number of worker threads.
"""

from __future__ import annotations

import json
import math
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .datamodel import Modality
from .exceptions import (
    CorruptModelError,
    DepfusionError,
    DimensionMismatchError,
    EmptyInputError,
    VersionMismatchError,
)

_LEAF = -1


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    mtry: int | None = None  # None: ceil(n_features / 3)
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise DepfusionError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise DepfusionError("min_samples_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise DepfusionError("max_depth must be >= 0")
        if self.mtry is not None and self.mtry < 1:
            raise DepfusionError("mtry must be >= 1")

    def resolve_mtry(self, n_features):
        mtry = math.ceil(n_features / 3) if self.mtry is None else self.mtry
        if not 1 <= mtry <= n_features:
            raise DepfusionError(f"mtry={mtry} outside [1, {n_features}]")
        return mtry


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Flattened pre-order tree. ``feature[i] == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features: int

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    @property
    def depth(self):
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != _LEAF:
                depths[self.left[i]] = depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise DimensionMismatchError(
                f"tree expects {self.n_features} features, got {X.shape[1]}"
            )
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.feature[node] != _LEAF
        while active.any():
            n = node[active]
            go_left = X[rows[active], self.feature[n]] <= self.threshold[n]
            node[active] = np.where(go_left, self.left[n], self.right[n])
            active = self.feature[node] != _LEAF
        return self.value[node]

    def same_structure(self, other):
        return (np.array_equal(self.left, other.left)
                and np.array_equal(self.right, other.right)
                and np.array_equal(self.feature == _LEAF, other.feature == _LEAF))


class PredictionWithConfidence(NamedTuple):
    mean: float
    std: float
    modality: Modality


def _best_split(Xn, yn, min_samples_leaf):
    """Best (column, threshold) of ``Xn`` by weighted child variance, or None.

    Minimising summed child SSE is the same as maximising
    S_L^2/n_L + S_R^2/n_R. Ties go to the lower column, then lower threshold.
    """
    m = yn.shape[0]
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = np.take_along_axis(Xn, order, axis=0)
    ys = yn[order]
    left_sum = np.cumsum(ys, axis=0)[:-1]
    right_sum = ys.sum(axis=0) - left_sum
    n_left = np.arange(1, m, dtype=np.float64)[:, None]
    score = left_sum**2 / n_left + right_sum**2 / (m - n_left)
    valid = xs[1:] != xs[:-1]
    if min_samples_leaf > 1:
        ok = (n_left >= min_samples_leaf) & (m - n_left >= min_samples_leaf)
        valid &= ok
    if not valid.any():
        return None
    score = np.where(valid, score, -np.inf)
    best = score.max()
    tied = score == best
    col = int(np.argmax(tied.any(axis=0)))
    pos = int(np.argmax(tied[:, col]))
    lo, hi = xs[pos, col], xs[pos + 1, col]
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return col, float(thr)


def fit_tree(X, y, params: ForestParams | None = None, rng=None) -> RegressionTree:
    """Grow one CART regression tree on all rows of ``X``."""
    params = params or ForestParams()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise EmptyInputError("need at least one row and one feature")
    if y.shape != (X.shape[0],):
        raise DimensionMismatchError(f"{X.shape[0]} rows but {y.shape} targets")
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence([params.seed & 0xFFFFFFFFFFFFFFFF, 0]))
    n_features = X.shape[1]
    mtry = params.resolve_mtry(n_features)
    msl = params.min_samples_leaf

    feature, threshold, left, right, value = [], [], [], [], []
    # (sample indices, depth, parent node, is_left); right pushed first for pre-order
    stack = [(np.arange(X.shape[0]), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node
        yn = y[idx]
        feature.append(_LEAF)
        threshold.append(0.0)
        left.append(_LEAF)
        right.append(_LEAF)
        value.append(float(np.mean(yn)) if np.ptp(yn) > 0 else float(yn[0]))

        if (params.max_depth is not None and depth >= params.max_depth) \
                or idx.size < 2 * msl or np.ptp(yn) == 0:
            continue
        feats = np.sort(rng.choice(n_features, size=mtry, replace=False)) \
            if mtry < n_features else np.arange(n_features)
        split = _best_split(X[np.ix_(idx, feats)], yn, msl)
        if split is None:
            continue
        col, thr = split
        f = int(feats[col])
        feature[node] = f
        threshold[node] = thr
        go_left = X[idx, f] <= thr
        stack.append((idx[~go_left], depth + 1, node, False))
        stack.append((idx[go_left], depth + 1, node, True))

    return RegressionTree(
        np.asarray(feature, dtype=np.int64), np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64), np.asarray(right, dtype=np.int64),
        np.asarray(value, dtype=np.float64), n_features,
    )


def tree_stream(seed, index):
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, index]))


def fit_forest(X, y, params: ForestParams | None = None, n_jobs=1) -> list[RegressionTree]:
    params = params or ForestParams()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInputError("need at least one training row")
    if y.shape != (X.shape[0],):
        raise DimensionMismatchError(f"{X.shape[0]} rows but {y.shape} targets")
    params.resolve_mtry(X.shape[1])
    n = X.shape[0]

    def build(i):
        rng = tree_stream(params.seed, i)
        if params.bootstrap:
            sample = rng.integers(0, n, size=n)
            return fit_tree(X[sample], y[sample], params, rng)
        return fit_tree(X, y, params, rng)

    if n_jobs is None or n_jobs == 1:
        return [build(i) for i in range(params.n_trees)]
    with ThreadPoolExecutor(max_workers=n_jobs if n_jobs > 0 else None) as pool:
        return list(pool.map(build, range(params.n_trees)))


def tree_predictions(trees, X) -> np.ndarray:
    """Per-tree predictions, shape (n_trees, n_rows)."""
    if not trees:
        raise EmptyInputError("forest has no trees")
    return np.vstack([t.predict(X) for t in trees])


def summarize_trees(per_tree):
    """Column-wise mean and population std of a (n_trees, n_rows) array."""
    per_tree = np.asarray(per_tree, dtype=np.float64)
    lo, hi = per_tree.min(axis=0), per_tree.max(axis=0)
    mean = np.clip(per_tree.mean(axis=0), lo, hi)
    std = np.where(hi == lo, 0.0, per_tree.std(axis=0))
    return mean, std


def predict_forest(trees, x, modality=Modality.AUDIO) -> PredictionWithConfidence:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatchError("predict_forest takes a single feature row")
    mean, std = summarize_trees(tree_predictions(trees, x[None, :]))
    return PredictionWithConfidence(float(mean[0]), float(std[0]), Modality(modality))


# ---------------------------------------------------------------------------
# model files
#
# b"DFRF" | u16 version | u32 header length | header JSON (params, metadata)
# | u32 n_trees | per tree: u32 n_nodes, u32 n_features, then feature(i8),
#   threshold(f8), left(i8), right(i8), value(f8) arrays, little-endian
# | u32 CRC32 of everything before it

MAGIC = b"DFRF"
FORMAT_VERSION = 1


class SerializedModel(NamedTuple):
    trees: list
    params: ForestParams
    metadata: dict


def serialize_model(trees, params: ForestParams, metadata=None) -> bytes:
    header = json.dumps({"params": asdict(params), "metadata": metadata or {}},
                        sort_keys=True, separators=(",", ":")).encode()
    parts = [MAGIC, struct.pack("<HI", FORMAT_VERSION, len(header)), header,
             struct.pack("<I", len(trees))]
    for t in trees:
        parts.append(struct.pack("<II", t.n_nodes, t.n_features))
        parts += [t.feature.astype("<i8").tobytes(), t.threshold.astype("<f8").tobytes(),
                  t.left.astype("<i8").tobytes(), t.right.astype("<i8").tobytes(),
                  t.value.astype("<f8").tobytes()]
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def deserialize_model(data: bytes) -> SerializedModel:
    data = bytes(data)
    if len(data) < 10 or data[:4] != MAGIC:
        raise CorruptModelError("not a depfusion model file")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"model format version {version}, expected {FORMAT_VERSION}")
    if len(data) < 14 or zlib.crc32(data[:-4]) != struct.unpack("<I", data[-4:])[0]:
        raise CorruptModelError("checksum mismatch (truncated or corrupted model)")
    try:
        (hlen,) = struct.unpack_from("<I", data, 6)
        off = 10
        header = json.loads(data[off:off + hlen])
        off += hlen
        params = ForestParams(**header["params"])
        (n_trees,) = struct.unpack_from("<I", data, off)
        off += 4
        trees = []
        for _ in range(n_trees):
            n_nodes, n_features = struct.unpack_from("<II", data, off)
            off += 8
            arrays = []
            for dtype in ("<i8", "<f8", "<i8", "<i8", "<f8"):
                size = 8 * n_nodes
                if off + size > len(data) - 4:
                    raise CorruptModelError("tree arrays run past end of stream")
                arrays.append(np.frombuffer(data, dtype=dtype, count=n_nodes, offset=off)
                              .astype(dtype[1:]))
                off += size
            trees.append(RegressionTree(*arrays, n_features=n_features))
        if off != len(data) - 4:
            raise CorruptModelError("trailing bytes after last tree")
    except (struct.error, ValueError, KeyError, TypeError) as exc:
        raise CorruptModelError(f"malformed model: {exc}") from None
    return SerializedModel(trees, params, header["metadata"])


# ---------------------------------------------------------------------------


class ConfidenceForestRegressor(RegressorMixin, BaseEstimator):
    """Random forest regressor that also reports the spread of its trees.

    ``predict`` returns the forest mean; ``predict_with_std`` additionally
    returns the population standard deviation of the per-tree predictions.
    """

    def __init__(self, n_trees=100, max_depth=None, min_samples_leaf=1, mtry=None,
                 bootstrap=True, seed=0, n_jobs=1):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.mtry = mtry
        self.bootstrap = bootstrap
        self.seed = seed
        self.n_jobs = n_jobs

    def forest_params(self):
        return ForestParams(self.n_trees, self.max_depth, self.min_samples_leaf,
                            self.mtry, self.bootstrap, self.seed)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        self.trees_ = fit_forest(X, y, self.forest_params(), self.n_jobs)
        self.n_features_in_ = X.shape[1]
        return self

    def _check(self, X):
        check_is_fitted(self, "trees_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"model expects {self.n_features_in_} features, got {X.shape[1]}"
            )
        return X

    def predict_with_std(self, X):
        return summarize_trees(tree_predictions(self.trees_, self._check(X)))

    def predict(self, X):
        return self.predict_with_std(X)[0]

    def predict_confidence(self, X, modality=Modality.AUDIO):
        mean, std = self.predict_with_std(X)
        modality = Modality(modality)
        return [PredictionWithConfidence(float(m), float(s), modality) for m, s in zip(mean, std)]

    def to_bytes(self, metadata=None):
        check_is_fitted(self, "trees_")
        return serialize_model(self.trees_, self.forest_params(), metadata)

    @classmethod
    def from_bytes(cls, data):
        model = deserialize_model(data)
        p = model.params
        est = cls(p.n_trees, p.max_depth, p.min_samples_leaf, p.mtry, p.bootstrap, p.seed)
        est.trees_ = model.trees
        est.n_features_in_ = model.trees[0].n_features
        est.metadata_ = model.metadata
        return est
