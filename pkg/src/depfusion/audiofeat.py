"""Audio feature vector from a per-frame acoustic descriptor table."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .datamodel import DescriptorSeries, FeatureVector, Modality
from .exceptions import DepfusionError, EmptyInputError
from .signalmath import STAT_NAMES, delta, stat_descriptors, top_k_dct

STREAMS = ("base", "delta", "delta_delta")
DCT_SELECTIONS = ("largest_magnitude", "first_k")


@dataclass(frozen=True)
class AudioConfig:
    dct_k: int = 10
    delta_window: int = 2
    streams: frozenset = field(default_factory=lambda: frozenset(STREAMS))
    stats_on: frozenset = field(default_factory=lambda: frozenset(STREAMS))
    dct_selection: str = "largest_magnitude"
    voiced_only: bool = False
    vuv_name: str = "VUV"

    def __post_init__(self):
        object.__setattr__(self, "streams", frozenset(self.streams))
        object.__setattr__(self, "stats_on", frozenset(self.stats_on))
        if self.dct_k < 1:
            raise DepfusionError("dct_k must be >= 1")
        if self.delta_window < 1:
            raise DepfusionError("delta_window must be >= 1")
        if not self.streams:
            raise DepfusionError("at least one stream must be enabled")
        unknown = (self.streams | self.stats_on) - set(STREAMS)
        if unknown:
            raise DepfusionError(f"unknown streams: {sorted(unknown)}")
        if self.dct_selection not in DCT_SELECTIONS:
            raise DepfusionError(f"dct_selection must be one of {DCT_SELECTIONS}")

    @property
    def enabled_streams(self):
        return tuple(s for s in STREAMS if s in self.streams)

    def features_per_descriptor(self):
        return sum(
            self.dct_k + (len(STAT_NAMES) if s in self.stats_on else 0)
            for s in self.enabled_streams
        )


def audio_feature_count(n_descriptors, config: AudioConfig):
    return n_descriptors * config.features_per_descriptor()


def audio_feature_names(descriptor_names, config: AudioConfig):
    names = []
    for desc in descriptor_names:
        for stream in config.enabled_streams:
            names.extend(f"{desc}.{stream}.dct{i}" for i in range(config.dct_k))
            if stream in config.stats_on:
                names.extend(f"{desc}.{stream}.{s}" for s in STAT_NAMES)
    return names


def _column_features(column, config: AudioConfig):
    streams = {"base": column}
    if "delta" in config.streams or "delta_delta" in config.streams:
        d = delta(column, config.delta_window)
        streams["delta"] = d
        if "delta_delta" in config.streams:
            streams["delta_delta"] = delta(d, config.delta_window)
    out = []
    for stream in config.enabled_streams:
        x = streams[stream]
        out.extend(top_k_dct(x, config.dct_k, config.dct_selection))
        if stream in config.stats_on:
            out.extend(stat_descriptors(x).as_tuple())
    return out


def extract_audio_features(series: DescriptorSeries, config: AudioConfig | None = None,
                           session_id: str = "") -> FeatureVector:
    config = config or AudioConfig()
    if series.n_frames == 0 or not series.descriptor_names:
        raise EmptyInputError("descriptor series is empty")
    frames = series.frames
    if config.voiced_only:
        if config.vuv_name not in series.descriptor_names:
            raise DepfusionError(f"voiced_only needs a {config.vuv_name!r} column")
        frames = frames[series.column(config.vuv_name) != 0]
        if frames.shape[0] == 0:
            raise EmptyInputError("no voiced frames")
    values = []
    for j in range(frames.shape[1]):
        values.extend(_column_features(frames[:, j], config))
    names = audio_feature_names(series.descriptor_names, config)
    return FeatureVector(session_id, Modality.AUDIO, names, np.asarray(values))


class AudioFeatureExtractor(TransformerMixin, BaseEstimator):
    """Stateless transformer mapping a list of DescriptorSeries to a feature matrix."""

    def __init__(self, dct_k=10, delta_window=2, streams=STREAMS, stats_on=STREAMS,
                 dct_selection="largest_magnitude", voiced_only=False):
        self.dct_k = dct_k
        self.delta_window = delta_window
        self.streams = streams
        self.stats_on = stats_on
        self.dct_selection = dct_selection
        self.voiced_only = voiced_only

    def _config(self):
        return AudioConfig(self.dct_k, self.delta_window, frozenset(self.streams),
                           frozenset(self.stats_on), self.dct_selection, self.voiced_only)

    def fit(self, X, y=None):
        if not len(X):
            raise EmptyInputError("no descriptor series to fit on")
        self.descriptor_names_ = tuple(X[0].descriptor_names)
        self.n_features_out_ = audio_feature_count(len(self.descriptor_names_), self._config())
        return self

    def transform(self, X):
        config = self._config()
        return np.vstack([extract_audio_features(s, config).values for s in X])

    def get_feature_names_out(self, input_features=None):
        return np.asarray(audio_feature_names(self.descriptor_names_, self._config()), dtype=object)
