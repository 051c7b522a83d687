"""Core domain types shared by the audio, video and text pipelines."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .exceptions import (
    DepfusionError,
    EmptyInputError,
    MissingFeaturesError,
    MissingLabelError,
)

PHQ8_MIN = 0
PHQ8_MAX = 24
N_LANDMARKS = 68


class Modality(str, enum.Enum):
    AUDIO = "audio"
    VIDEO = "video"
    TEXT = "text"

    def __str__(self):
        return self.value


class Split(str, enum.Enum):
    TRAIN = "train"
    DEVELOPMENT = "development"
    TEST = "test"

    def __str__(self):
        return self.value


def _frozen_array(values, ndim=None, dtype=np.float64):
    arr = np.array(values, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise DepfusionError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def clamp_phq8(values):
    """Clamp predictions to the PHQ-8 scale. Used only when reporting."""
    return np.clip(np.asarray(values, dtype=np.float64), PHQ8_MIN, PHQ8_MAX)


@dataclass(frozen=True)
class SessionRecord:
    session_id: str
    gender: int
    phq8: int | None = None
    split: Split = Split.TRAIN

    def __post_init__(self):
        if not self.session_id:
            raise DepfusionError("session_id must be non-empty")
        if self.gender not in (0, 1):
            raise DepfusionError(f"{self.session_id}: gender must be 0 or 1, got {self.gender!r}")
        if self.phq8 is not None:
            if int(self.phq8) != self.phq8 or not PHQ8_MIN <= self.phq8 <= PHQ8_MAX:
                raise DepfusionError(f"{self.session_id}: phq8 {self.phq8!r} outside [0, 24]")
            object.__setattr__(self, "phq8", int(self.phq8))
        object.__setattr__(self, "split", Split(self.split))


@dataclass(frozen=True)
class DescriptorSeries:
    """Per-frame acoustic descriptor matrix (frames x descriptors)."""

    descriptor_names: tuple[str, ...]
    frames: np.ndarray
    frame_period: float = 0.01
    nan_count: int = 0

    def __post_init__(self):
        names = tuple(self.descriptor_names)
        frames = _frozen_array(self.frames, ndim=2)
        if frames.shape[1] != len(names):
            raise DepfusionError(
                f"{frames.shape[1]} descriptor columns but {len(names)} names"
            )
        if not self.frame_period > 0:
            raise DepfusionError("frame_period must be positive")
        if np.isnan(frames).any():
            raise DepfusionError("descriptor frames contain NaN")
        object.__setattr__(self, "descriptor_names", names)
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self):
        return self.frames.shape[0]

    def column(self, name):
        return self.frames[:, self.descriptor_names.index(name)]


@dataclass(frozen=True)
class LandmarkSeries:
    """68-point 2D landmark track. ``frames`` has shape (n_frames, 68, 2)."""

    frames: np.ndarray
    timestamps: np.ndarray
    confidence: np.ndarray | None = None

    def __post_init__(self):
        frames = _frozen_array(self.frames, ndim=3)
        if frames.shape[1:] != (N_LANDMARKS, 2):
            raise DepfusionError(f"landmark frames must be (n, 68, 2), got {frames.shape}")
        ts = _frozen_array(self.timestamps, ndim=1)
        if ts.shape[0] != frames.shape[0]:
            raise DepfusionError("one timestamp per frame required")
        if ts.size > 1 and np.any(np.diff(ts) < 0):
            raise DepfusionError("timestamps must be non-decreasing")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "timestamps", ts)
        if self.confidence is not None:
            object.__setattr__(self, "confidence", _frozen_array(self.confidence, ndim=1))

    @property
    def n_frames(self):
        return self.frames.shape[0]


@dataclass(frozen=True)
class Utterance:
    start_time: float
    stop_time: float
    speaker: str
    text: str

    def __post_init__(self):
        if self.stop_time < self.start_time:
            raise DepfusionError(
                f"utterance stops ({self.stop_time}) before it starts ({self.start_time})"
            )


@dataclass(frozen=True)
class Transcript:
    utterances: tuple[Utterance, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))

    @property
    def duration(self):
        if not self.utterances:
            return 0.0
        return self.utterances[-1].stop_time - self.utterances[0].start_time

    def by_speaker(self, tag):
        tag = tag.lower()
        return tuple(u for u in self.utterances if u.speaker.lower() == tag)


@dataclass(frozen=True)
class FeatureVector:
    session_id: str
    modality: Modality
    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        values = _frozen_array(self.values, ndim=1)
        if len(names) != values.shape[0]:
            raise DepfusionError(f"{len(names)} names for {values.shape[0]} values")
        if len(set(names)) != len(names):
            raise DepfusionError("feature names must be unique")
        if not np.all(np.isfinite(values)):
            bad = [n for n, v in zip(names, values) if not np.isfinite(v)]
            raise DepfusionError(f"non-finite feature values: {bad[:5]}")
        object.__setattr__(self, "modality", Modality(self.modality))
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.names)

    def as_dict(self):
        return dict(zip(self.names, self.values.tolist()))


@dataclass(frozen=True)
class Dataset:
    records: tuple[SessionRecord, ...]
    features: Mapping[tuple[str, Modality], FeatureVector] = field(default_factory=dict)

    def __post_init__(self):
        records = tuple(self.records)
        ids = [r.session_id for r in records]
        if len(set(ids)) != len(ids):
            raise DepfusionError("session_id values must be unique within a dataset")
        known = set(ids)
        features = {}
        names_by_modality = {}
        for (sid, modality), fv in self.features.items():
            modality = Modality(modality)
            if sid not in known:
                raise DepfusionError(f"features reference unknown session {sid!r}")
            expected = names_by_modality.setdefault(modality, fv.names)
            if fv.names != expected:
                raise DepfusionError(f"{modality} feature names differ for session {sid!r}")
            features[(sid, modality)] = fv
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "features", features)

    def record(self, session_id):
        for r in self.records:
            if r.session_id == session_id:
                return r
        raise KeyError(session_id)

    def feature_names(self, modality):
        modality = Modality(modality)
        for (_, m), fv in self.features.items():
            if m == modality:
                return fv.names
        return ()

    def subset(self, split):
        split = Split(split)
        keep = tuple(r for r in self.records if r.split == split)
        ids = {r.session_id for r in keep}
        feats = {k: v for k, v in self.features.items() if k[0] in ids}
        return Dataset(keep, feats)


def assemble_design_matrix(
    dataset: Dataset,
    modality,
    include_gender: bool = False,
    split=None,
    require_labels: bool = True,
):
    """Stack one modality's feature vectors into a design matrix.

    Rows are ordered by ascending ``session_id`` regardless of record order.
    With ``include_gender`` the gender covariate becomes one extra trailing
    column. Returns ``(X, y, row_ids)``; ``y`` holds NaN for unlabeled rows
    when ``require_labels`` is false.
    """
    modality = Modality(modality)
    records = dataset.records
    if split is not None:
        records = [r for r in records if r.split == Split(split)]
    records = sorted(records, key=lambda r: r.session_id)
    if not records:
        raise EmptyInputError("no sessions to assemble")

    rows, targets, ids = [], [], []
    for rec in records:
        if rec.phq8 is None and require_labels:
            raise MissingLabelError(rec.session_id)
        fv = dataset.features.get((rec.session_id, modality))
        if fv is None:
            raise MissingFeaturesError(rec.session_id, modality.value)
        row = fv.values
        if include_gender:
            row = np.append(row, float(rec.gender))
        rows.append(row)
        targets.append(np.nan if rec.phq8 is None else float(rec.phq8))
        ids.append(rec.session_id)
    return np.vstack(rows), np.asarray(targets, dtype=np.float64), ids


def design_column_names(dataset: Dataset, modality, include_gender=False) -> list[str]:
    names = list(dataset.feature_names(modality))
    if include_gender:
        names.append("gender")
    return names


def records_by_id(records: Sequence[SessionRecord]) -> dict[str, SessionRecord]:
    return {r.session_id: r for r in records}
