"""Per-session extraction over a ``<root>/<session_id>/`` directory tree."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .audiofeat import extract_audio_features
from .config import RunConfig
from .datamodel import Dataset, Modality
from .ingest import load_lexicon, parse_descriptor_table, parse_landmark_table, parse_transcript
from .textfeat import extract_text_features
from .videofeat import extract_video_features

log = logging.getLogger(__name__)


def session_file(cfg: RunConfig, modality):
    return {
        Modality.AUDIO: cfg.descriptor_file,
        Modality.VIDEO: cfg.landmark_file,
        Modality.TEXT: cfg.transcript_file,
    }[Modality(modality)]


def discover_sessions(root, cfg: RunConfig, modality) -> list[Path]:
    """Session directories under ``root`` holding this modality's file, sorted by name."""
    root = Path(root)
    if not root.is_dir():
        return []
    name = session_file(cfg, modality)
    return sorted(p for p in root.iterdir() if p.is_dir() and any(p.glob(name)))


def load_lexicons(cfg: RunConfig):
    dep = sent = None
    if cfg.depression_lexicon is not None:
        dep = load_lexicon(Path(cfg.depression_lexicon).read_text(encoding="utf-8"), "depression")
    if cfg.sentiment_lexicon is not None:
        sent = load_lexicon(Path(cfg.sentiment_lexicon).read_text(encoding="utf-8"), "sentiment")
    return dep, sent


def extract_session(session_dir, modality, cfg: RunConfig, lexicons=(None, None)):
    session_dir = Path(session_dir)
    modality = Modality(modality)
    path = next(iter(sorted(session_dir.glob(session_file(cfg, modality)))))
    text = path.read_text(encoding="utf-8")
    sid = session_dir.name
    if modality is Modality.AUDIO:
        series = parse_descriptor_table(text, cfg.column_map())
        if series.nan_count:
            log.info("%s: replaced %d missing descriptor cells", sid, series.nan_count)
        return extract_audio_features(series, cfg.audio_config(), session_id=sid)
    if modality is Modality.VIDEO:
        series = parse_landmark_table(text, cfg.column_map())
        return extract_video_features(series, cfg.stable_points(), cfg.region_groups(), session_id=sid)
    dep, sent = lexicons
    return extract_text_features(parse_transcript(text), cfg.participant_tag, dep, sent, session_id=sid)


def extract_all(root, modality, cfg: RunConfig, jobs=1):
    """Extract every discoverable session. Returns ``(vectors, failures)``.

    Output order is session order whatever ``jobs`` is; failures are
    ``(session_id, error)`` pairs and do not stop the run.
    """
    sessions = discover_sessions(root, cfg, modality)
    lexicons = load_lexicons(cfg) if Modality(modality) is Modality.TEXT else (None, None)

    def work(path):
        try:
            return extract_session(path, modality, cfg, lexicons), None
        except Exception as exc:  # noqa: BLE001 - per-session failures are reported, not fatal
            return None, exc

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, sessions))
    else:
        results = [work(p) for p in sessions]
    vectors, failures = [], []
    for path, (fv, exc) in zip(sessions, results):
        if exc is None:
            vectors.append(fv)
        else:
            log.warning("%s: %s extraction failed: %s", path.name, Modality(modality).value, exc)
            failures.append((path.name, exc))
    return vectors, failures


def build_dataset(records, vectors_by_modality) -> Dataset:
    features = {}
    for modality, vectors in vectors_by_modality.items():
        for fv in vectors:
            features[(fv.session_id, Modality(modality))] = fv
    known = {r.session_id for r in records}
    features = {k: v for k, v in features.items() if k[0] in known}
    return Dataset(tuple(records), features)


def extract_dataset(cfg: RunConfig, records, jobs=1) -> Dataset:
    vectors = {m: extract_all(cfg.data_root, m, cfg, jobs)[0] for m in Modality}
    return build_dataset(records, vectors)
