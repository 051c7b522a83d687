"""Geometric features from a 68-point facial landmark track.

All features are computed on the session mean shape: 46 stable points in
centroid-relative polar form (92 values) plus 41 within-region chain
distances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .datamodel import N_LANDMARKS, FeatureVector, LandmarkSeries, Modality
from .exceptions import DepfusionError, EmptyInputError

# brows 17-26, nose bridge 27-30, eyes 36-47, mouth 48-67
DEFAULT_STABLE_INDICES = tuple(range(17, 31)) + tuple(range(36, 68))


def _loop(indices):
    idx = list(indices)
    return list(zip(idx, idx[1:] + idx[:1]))


def _chain(indices):
    idx = list(indices)
    return list(zip(idx, idx[1:]))


@dataclass(frozen=True)
class StablePointSet:
    indices: tuple[int, ...] = DEFAULT_STABLE_INDICES

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) != 46 or len(set(idx)) != 46:
            raise DepfusionError("stable point set needs exactly 46 distinct indices")
        if min(idx) < 0 or max(idx) >= N_LANDMARKS:
            raise DepfusionError("stable point indices must lie in [0, 67]")
        object.__setattr__(self, "indices", idx)


@dataclass(frozen=True)
class RegionGroups:
    left: tuple[int, ...] = tuple(range(17, 22)) + tuple(range(36, 42))
    right: tuple[int, ...] = tuple(range(22, 27)) + tuple(range(42, 48))
    mouth: tuple[int, ...] = tuple(range(48, 68))

    def __post_init__(self):
        groups = [set(self.left), set(self.right), set(self.mouth)]
        if sum(len(g) for g in groups) != len(set().union(*groups)):
            raise DepfusionError("region groups must be disjoint")
        if (len(self.left), len(self.right), len(self.mouth)) != (11, 11, 20):
            raise DepfusionError("region groups must have sizes 11, 11, 20")

    def pairs(self):
        """Landmark pairs whose distances form the group features, in output order."""
        left_brow, left_eye = self.left[:5], self.left[5:]
        right_brow, right_eye = self.right[:5], self.right[5:]
        outer_lip, inner_lip = self.mouth[:12], self.mouth[12:]
        return (
            _chain(left_brow) + _loop(left_eye)
            + _chain(right_brow) + _loop(right_eye)
            + _loop(outer_lip) + _loop(inner_lip)
            + [(inner_lip[2], inner_lip[6])]  # mouth opening, 62-66 by default
        )


def _check_shape(shape):
    shape = np.asarray(shape, dtype=np.float64)
    if shape.shape != (N_LANDMARKS, 2):
        raise DepfusionError(f"shape must be (68, 2), got {shape.shape}")
    return shape


def mean_shape(series: LandmarkSeries):
    if series.n_frames == 0:
        raise EmptyInputError("landmark series has no frames")
    return series.frames.mean(axis=0)


def polar_features(shape, stable: StablePointSet | None = None):
    """Distance and angle (radians, in (-pi, pi]) of each stable point from their centroid.

    Emitted per point in index order as (distance, angle).
    """
    stable = stable or StablePointSet()
    pts = _check_shape(shape)[list(stable.indices)]
    offsets = pts - pts.mean(axis=0)
    dist = np.hypot(offsets[:, 0], offsets[:, 1])
    angle = np.arctan2(offsets[:, 1], offsets[:, 0])
    angle[angle == -np.pi] = np.pi
    angle[dist == 0] = 0.0
    out = np.empty(2 * len(pts))
    out[0::2] = dist
    out[1::2] = angle
    return out


def polar_feature_names(stable: StablePointSet | None = None):
    stable = stable or StablePointSet()
    names = []
    for i in stable.indices:
        names += [f"polar.dist.{i}", f"polar.angle.{i}"]
    return names


def group_features_from_shape(shape, groups: RegionGroups | None = None):
    groups = groups or RegionGroups()
    shape = _check_shape(shape)
    a, b = np.array(groups.pairs()).T
    diff = shape[a] - shape[b]
    return np.hypot(diff[:, 0], diff[:, 1])


def group_features(series: LandmarkSeries, groups: RegionGroups | None = None):
    return group_features_from_shape(mean_shape(series), groups)


def group_feature_names(groups: RegionGroups | None = None):
    groups = groups or RegionGroups()
    return [f"group.{a}-{b}" for a, b in groups.pairs()]


def extract_video_features(series: LandmarkSeries, stable: StablePointSet | None = None,
                           groups: RegionGroups | None = None,
                           session_id: str = "") -> FeatureVector:
    shape = mean_shape(series)
    values = np.concatenate([polar_features(shape, stable), group_features_from_shape(shape, groups)])
    names = polar_feature_names(stable) + group_feature_names(groups)
    return FeatureVector(session_id, Modality.VIDEO, names, values)


class VideoFeatureExtractor(TransformerMixin, BaseEstimator):
    def __init__(self, stable_indices=DEFAULT_STABLE_INDICES, groups=None):
        self.stable_indices = stable_indices
        self.groups = groups

    def fit(self, X, y=None):
        self.n_features_out_ = len(self.get_feature_names_out())
        return self

    def transform(self, X):
        stable = StablePointSet(tuple(self.stable_indices))
        return np.vstack([extract_video_features(s, stable, self.groups).values for s in X])

    def get_feature_names_out(self, input_features=None):
        stable = StablePointSet(tuple(self.stable_indices))
        return np.asarray(polar_feature_names(stable) + group_feature_names(self.groups), dtype=object)
