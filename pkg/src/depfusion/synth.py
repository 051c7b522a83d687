"""Synthetic sessions for desk-scale verification.

Each session gets a latent severity on the PHQ-8 grid. It drives one chosen
modality (descriptor means, mouth opening, or lexicon-word density); the
other two modalities are noise that ignores severity. Everything is derived
from the seed, so two runs write byte-identical trees.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig, format_config
from .datamodel import N_LANDMARKS, Modality, SessionRecord, Split
from .exceptions import DepfusionError
from .ingest import COVAREP_NAMES, format_labels

DRIVEN_DESCRIPTORS = ("F0", "NAQ", "QOQ", "MCEP_0", "MCEP_1", "MCEP_2", "HMPDM_0")
SIGNAL_SPAN = 4.0  # signal units between PHQ-8 0 and 24
DEFAULT_INFORMATIVE_NOISE = 0.5
DEFAULT_NOISE = 1.0

# valences copied from AFINN-111
SENTIMENT_WORDS = {
    "abandon": -2, "alone": -2, "awesome": 4, "bad": -3, "cry": -1, "depressed": -2,
    "fine": 2, "good": 3, "great": 3, "happy": 3, "hate": -3, "hopeless": -2, "joy": 3,
    "lonely": -2, "love": 3, "nice": 3, "sad": -2, "terrible": -3, "tired": -2, "worried": -3,
}
DEPRESSION_WORDS = (
    "depressed", "hopeless", "worthless", "empty", "lonely", "sad", "tired", "exhausted",
    "anxious", "guilty", "miserable", "numb", "crying", "helpless", "isolated", "insomnia",
    "fatigue", "withdrawn", "gloomy", "despair", "grief", "sorrow", "unhappy", "hurt",
    "stress", "worry",
)
NEUTRAL_WORDS = (
    "i", "you", "the", "a", "and", "it", "was", "is", "to", "of", "in", "my", "we", "they",
    "work", "home", "school", "family", "friend", "weekend", "think", "know", "went",
    "yeah", "really", "um", "uh", "like", "just", "time", "day", "city", "movie", "food",
    "music", "job", "car", "travel", "morning", "night",
)
_POSITIVE = tuple(w for w, v in SENTIMENT_WORDS.items() if v > 0)
_NEGATIVE = tuple(w for w, v in SENTIMENT_WORDS.items() if v < 0)


@dataclass(frozen=True)
class SynthConfig:
    n_sessions: int = 200
    seed: int = 0
    informative_modality: Modality = Modality.AUDIO
    noise_levels: dict = field(default_factory=dict)
    n_audio_frames: int = 100
    n_video_frames: int = 30
    dev_fraction: float = 0.3
    driven_descriptors: tuple = DRIVEN_DESCRIPTORS

    def __post_init__(self):
        object.__setattr__(self, "informative_modality", Modality(self.informative_modality))
        if self.n_sessions < 1:
            raise DepfusionError("n_sessions must be >= 1")
        levels = {m: (DEFAULT_INFORMATIVE_NOISE if m is self.informative_modality else DEFAULT_NOISE)
                  for m in Modality}
        levels.update({Modality(k): float(v) for k, v in self.noise_levels.items()})
        if any(v < 0 for v in levels.values()):
            raise DepfusionError("noise levels must be >= 0")
        object.__setattr__(self, "noise_levels", levels)
        if not 0 <= self.dev_fraction < 1:
            raise DepfusionError("dev_fraction must be in [0, 1)")
        unknown = set(self.driven_descriptors) - set(COVAREP_NAMES)
        if unknown:
            raise DepfusionError(f"unknown driven descriptors {sorted(unknown)}")

    def noise(self, modality):
        return self.noise_levels[Modality(modality)]


def template_face():
    """A frontal 68-point face, y pointing up, mouth closed."""
    pts = np.zeros((N_LANDMARKS, 2))
    t = np.linspace(np.pi * 1.1, np.pi * 1.9, 17)
    pts[0:17] = np.c_[80 * np.cos(t), 20 + 100 * np.sin(t)]
    bx = np.linspace(-60, -15, 5)
    pts[17:22] = np.c_[bx, 50 + 4 * np.sin(np.linspace(0, np.pi, 5))]
    pts[22:27] = np.c_[-bx[::-1], 50 + 4 * np.sin(np.linspace(0, np.pi, 5))]
    pts[27:31] = np.c_[np.zeros(4), np.linspace(40, 10, 4)]
    pts[31:36] = np.c_[np.linspace(-16, 16, 5), np.zeros(5)]
    eye = np.deg2rad([180, 120, 60, 0, 300, 240])
    pts[36:42] = np.c_[-35 + 12 * np.cos(eye), 30 + 6 * np.sin(eye)]
    pts[42:48] = np.c_[35 + 12 * np.cos(eye), 30 + 6 * np.sin(eye)]
    outer = np.deg2rad(np.arange(180, -180, -30))
    pts[48:60] = np.c_[30 * np.cos(outer), -40 + 12 * np.sin(outer)]
    pts[60:68] = inner_lip(1.0)
    return pts


def inner_lip(opening):
    ang = np.deg2rad([180, 135, 90, 45, 0, 315, 270, 225])
    return np.c_[20 * np.cos(ang), -40 + (opening / 2.0) * np.sin(ang)]


def _severity_unit(phq8):
    return phq8 / 24.0


def _audio_table(rng, cfg: SynthConfig, phq8):
    names = COVAREP_NAMES
    n = cfg.n_audio_frames
    informative = cfg.informative_modality is Modality.AUDIO
    level = cfg.noise(Modality.AUDIO)
    base = np.linspace(-1.0, 1.0, len(names))
    frames = np.empty((n, len(names)))
    for j, name in enumerate(names):
        if name == "VUV":
            frames[:, j] = (rng.random(n) < 0.7).astype(float)
            continue
        amp = level if (not informative or name in cfg.driven_descriptors) else DEFAULT_NOISE
        offset = rng.normal(0.0, 1.0)
        col = base[j] + amp * (offset + rng.normal(0.0, 1.0, n))
        if informative and name in cfg.driven_descriptors:
            col = col + SIGNAL_SPAN * _severity_unit(phq8)
        frames[:, j] = col
    buf = io.StringIO()
    np.savetxt(buf, frames, fmt="%.6f", delimiter=",", header=",".join(names), comments="")
    return buf.getvalue()


def _landmark_table(rng, cfg: SynthConfig, phq8):
    n = cfg.n_video_frames
    level = cfg.noise(Modality.VIDEO)
    face = template_face()
    if cfg.informative_modality is Modality.VIDEO:
        opening = 1.0 + 3.0 * SIGNAL_SPAN * _severity_unit(phq8) + level * rng.normal()
    else:
        opening = 1.0 + 3.0 * SIGNAL_SPAN * rng.random() * level
    face[60:68] = inner_lip(max(opening, 0.0))
    face = face + level * 1.5 * rng.normal(size=face.shape)
    drift = np.cumsum(rng.normal(0.0, 0.5, size=(n, 2)), axis=0) + [320.0, 240.0]
    frames = face[None] + drift[:, None, :] + 0.3 * rng.normal(size=(n, N_LANDMARKS, 2))
    rows = np.column_stack([np.arange(1, n + 1), np.arange(n) / 30.0,
                            frames[:, :, 0], frames[:, :, 1]])
    header = ["frame", "timestamp"] + [f"x{i}" for i in range(N_LANDMARKS)] \
        + [f"y{i}" for i in range(N_LANDMARKS)]
    buf = io.StringIO()
    np.savetxt(buf, rows, fmt=["%d", "%.4f"] + ["%.4f"] * (2 * N_LANDMARKS),
               delimiter=",", header=",".join(header), comments="")
    return buf.getvalue()


def _transcript(rng, cfg: SynthConfig, phq8):
    level = cfg.noise(Modality.TEXT)
    if cfg.informative_modality is Modality.TEXT:
        z = _severity_unit(phq8)
        p_dep = np.clip(0.02 + 0.25 * z + 0.05 * level * rng.normal(), 0.0, 0.6)
        p_neg = np.clip(0.05 + 0.3 * z + 0.05 * level * rng.normal(), 0.0, 0.6)
    else:
        p_dep = np.clip(0.02 + 0.25 * rng.random() * level, 0.0, 0.6)
        p_neg = np.clip(0.05 + 0.3 * rng.random() * level, 0.0, 0.6)
    p_pos = 0.08
    lines = ["start_time\tstop_time\tspeaker\tvalue"]
    t = 0.0
    for _ in range(int(rng.integers(15, 31))):
        q_len = 1.0 + 2.0 * rng.random()
        lines.append(f"{t:.3f}\t{t + q_len:.3f}\tEllie\thow are you doing today")
        t += q_len + 0.3 + rng.random()
        words = []
        for _ in range(int(rng.integers(3, 12))):
            u = rng.random()
            if u < p_dep:
                words.append(DEPRESSION_WORDS[rng.integers(len(DEPRESSION_WORDS))])
            elif u < p_dep + p_neg:
                words.append(_NEGATIVE[rng.integers(len(_NEGATIVE))])
            elif u < p_dep + p_neg + p_pos:
                words.append(_POSITIVE[rng.integers(len(_POSITIVE))])
            else:
                words.append(NEUTRAL_WORDS[rng.integers(len(NEUTRAL_WORDS))])
        if rng.random() < 0.1:
            words.append("<laughter>")
        a_len = 0.4 * len(words) + rng.random()
        lines.append(f"{t:.3f}\t{t + a_len:.3f}\tParticipant\t{' '.join(words)}")
        t += a_len + 0.5 + rng.random()
    return "\n".join(lines) + "\n"


def synth_records(cfg: SynthConfig):
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
    width = max(3, len(str(cfg.n_sessions - 1)))
    ids = [f"s{i:0{width}d}" for i in range(cfg.n_sessions)]
    phq8 = rng.integers(0, 25, size=cfg.n_sessions)
    gender = rng.integers(0, 2, size=cfg.n_sessions)
    n_dev = int(round(cfg.dev_fraction * cfg.n_sessions))
    dev = set(rng.permutation(cfg.n_sessions)[:n_dev].tolist())
    return [SessionRecord(sid, int(g), int(p), Split.DEVELOPMENT if i in dev else Split.TRAIN)
            for i, (sid, p, g) in enumerate(zip(ids, phq8, gender))]


def write_lexicons(out_dir):
    lex = Path(out_dir) / "lexicons"
    lex.mkdir(parents=True, exist_ok=True)
    (lex / "sentiment.tsv").write_text(
        "".join(f"{w}\t{v}\n" for w, v in sorted(SENTIMENT_WORDS.items())), encoding="utf-8")
    (lex / "depression.txt").write_text("".join(f"{w}\n" for w in DEPRESSION_WORDS),
                                        encoding="utf-8")
    return lex / "sentiment.tsv", lex / "depression.txt"


def synth_generate(config: SynthConfig, out_dir) -> list[SessionRecord]:
    """Write ``sessions/<id>/{descriptors.csv, landmarks.csv, transcript.tsv}``,
    ``labels.csv``, lexicons and a matching ``depfusion.cfg`` under ``out_dir``.
    """
    out_dir = Path(out_dir)
    sessions = out_dir / "sessions"
    sessions.mkdir(parents=True, exist_ok=True)
    records = synth_records(config)
    for i, rec in enumerate(records):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1, i]))
        d = sessions / rec.session_id
        d.mkdir(exist_ok=True)
        (d / "descriptors.csv").write_text(_audio_table(rng, config, rec.phq8), encoding="utf-8")
        (d / "landmarks.csv").write_text(_landmark_table(rng, config, rec.phq8), encoding="utf-8")
        (d / "transcript.tsv").write_text(_transcript(rng, config, rec.phq8), encoding="utf-8")
    (out_dir / "labels.csv").write_text(format_labels(records), encoding="utf-8")
    sent, dep = write_lexicons(out_dir)
    cfg = RunConfig(data_root=sessions, labels=out_dir / "labels.csv",
                    sentiment_lexicon=sent, depression_lexicon=dep, seed=config.seed)
    (out_dir / "depfusion.cfg").write_text(format_config(cfg, base_dir=out_dir), encoding="utf-8")
    return records
