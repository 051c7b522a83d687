"""Run configuration: a flat ``key = value`` file whose keys mirror the CLI flags.

Lines starting with ``#`` or ``;`` are comments. Relative paths are resolved
against the directory holding the config file.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from . import __version__
from .audiofeat import STREAMS, AudioConfig
from .exceptions import DepfusionError
from .forest import ForestParams
from .fusion import Strategy
from .ingest import COVAREP_NAMES, ColumnMap
from .textfeat import DEFAULT_PARTICIPANT_TAG
from .videofeat import DEFAULT_STABLE_INDICES, RegionGroups, StablePointSet

PATH_KEYS = ("data_root", "labels", "sentiment_lexicon", "depression_lexicon", "out")
# settings that never change outputs, excluded from the config hash
_UNHASHED = PATH_KEYS + ("jobs",)


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise DepfusionError(f"not a boolean: {v!r}")


def _optional_int(v):
    if v is None or str(v).strip().lower() in ("", "none", "unlimited"):
        return None
    return int(v)


def _names(v):
    if isinstance(v, str):
        return tuple(s.strip() for s in v.split(",") if s.strip())
    return tuple(v)


def _ints(v):
    return tuple(int(s) for s in _names(v))


_CONVERTERS = {
    "dct_k": int, "delta_window": int, "streams": _names, "stats_on": _names,
    "voiced_only": _bool, "frame_period": float, "stable_indices": _ints,
    "n_trees": int, "max_depth": _optional_int, "min_samples_leaf": int, "mtry": _optional_int,
    "bootstrap": _bool, "seed": int, "include_gender": _bool, "jobs": int,
}


@dataclass(frozen=True)
class RunConfig:
    data_root: Path | None = None
    labels: Path | None = None
    sentiment_lexicon: Path | None = None
    depression_lexicon: Path | None = None
    out: Path | None = None
    descriptor_file: str = "descriptors.csv"
    landmark_file: str = "landmarks.csv"
    transcript_file: str = "transcript.tsv"
    frame_period: float = 0.01
    dct_k: int = 10
    delta_window: int = 2
    streams: tuple = STREAMS
    stats_on: tuple = STREAMS
    dct_selection: str = "largest_magnitude"
    voiced_only: bool = False
    stable_indices: tuple = DEFAULT_STABLE_INDICES
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    mtry: int | None = None
    bootstrap: bool = True
    seed: int = 0
    strategy: str = "winner_take_all"
    participant_tag: str = DEFAULT_PARTICIPANT_TAG
    include_gender: bool = False
    jobs: int = 1

    def __post_init__(self):
        Strategy(self.strategy)
        self.audio_config()
        self.forest_params()
        StablePointSet(tuple(self.stable_indices))

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    def updated(self, overrides, base_dir=None):
        """Copy with string or typed ``overrides`` applied; ``None`` values are ignored."""
        changes = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in self.keys():
                raise DepfusionError(f"unknown config key {key!r}")
            if key in PATH_KEYS:
                p = Path(value)
                if base_dir is not None and not p.is_absolute():
                    p = Path(base_dir) / p
                value = p
            elif key in _CONVERTERS:
                value = _CONVERTERS[key](value)
            changes[key] = value
        return replace(self, **changes)

    def audio_config(self):
        return AudioConfig(self.dct_k, self.delta_window, frozenset(self.streams),
                           frozenset(self.stats_on), self.dct_selection, self.voiced_only)

    def forest_params(self):
        return ForestParams(self.n_trees, self.max_depth, self.min_samples_leaf, self.mtry,
                            self.bootstrap, self.seed)

    def column_map(self):
        return ColumnMap(descriptor_names=COVAREP_NAMES, frame_period=self.frame_period)

    def stable_points(self):
        return StablePointSet(tuple(self.stable_indices))

    def region_groups(self):
        return RegionGroups()

    def hashable(self):
        d = asdict(self)
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in sorted(d.items()) if k not in _UNHASHED}

    def config_hash(self):
        blob = json.dumps(self.hashable(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def provenance(self):
        """One-line stamp embedded in every output artifact."""
        return f"depfusion {__version__} config={self.config_hash()} seed={self.seed}"

    def require(self, *keys):
        for key in keys:
            value = getattr(self, key)
            if value is None:
                raise DepfusionError(f"missing required setting {key!r}")
            if key in PATH_KEYS and key != "out" and not Path(value).exists():
                raise DepfusionError(f"{key} path does not exist: {value}")


def read_config_file(path) -> dict:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=None)
    parser.optionxform = str
    text = Path(path).read_text()
    parser.read_string("[run]\n" + text, source=str(path))
    return dict(parser["run"])


def load_config(path=None, overrides=None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        cfg = cfg.updated(read_config_file(path), base_dir=Path(path).parent)
    if overrides:
        cfg = cfg.updated(overrides)
    return cfg


def format_config(cfg: RunConfig, base_dir=None) -> str:
    lines = [f"# {cfg.provenance()}"]
    for key in cfg.keys():
        value = getattr(cfg, key)
        if value is None:
            continue
        if key in PATH_KEYS and base_dir is not None:
            try:
                value = Path(value).relative_to(base_dir)
            except ValueError:
                pass
        if isinstance(value, (tuple, list, frozenset)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
