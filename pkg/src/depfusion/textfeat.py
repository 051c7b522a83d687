"""Transcript statistics, depression-lexicon ratio and sentiment-series features."""

from __future__ import annotations

import re

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .datamodel import FeatureVector, Modality, Transcript
from .exceptions import ZeroDurationError
from .ingest import Lexicon

DEFAULT_PARTICIPANT_TAG = "Participant"
LAUGHTER_MARKERS = ("laughter", "<laughter>", "[laughter]")

BASIC_NAMES = ("sentences_per_minute", "word_count", "laughter_ratio", "depression_ratio")
SENTIMENT_NAMES = tuple(
    f"sentiment_{s}"
    for s in ("mean", "median", "min", "max", "std", "positive_fraction",
              "negative_fraction", "sum")
)
TEXT_FEATURE_NAMES = BASIC_NAMES + SENTIMENT_NAMES

_TOKEN = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)*")


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens; internal apostrophes are kept (``i'm``)."""
    return _TOKEN.findall(text.lower())


def _marker_tokens(markers):
    return {t for m in markers for t in tokenize(m)}


def is_laughter(token, markers=LAUGHTER_MARKERS):
    return token in _marker_tokens(markers)


def _phrase_count(text, phrase):
    return len(re.findall(r"(?<![a-z0-9'])" + re.escape(phrase) + r"(?![a-z0-9'])", text))


def _match_lexicon(text, tokens, lexicon: Lexicon):
    """Sum of lexicon values over matched single tokens and literal multiword entries."""
    words = lexicon.words
    total = sum(words.get(t, 0) for t in tokens)
    if lexicon.phrases:
        lowered = text.lower()
        total += sum(v * _phrase_count(lowered, p) for p, v in lexicon.phrases.items())
    return total


def _participant_duration(utterances):
    return max(u.stop_time for u in utterances) - min(u.start_time for u in utterances)


def basic_text_features(transcript: Transcript, participant_tag=DEFAULT_PARTICIPANT_TAG,
                        dep_lexicon: Lexicon | None = None,
                        laughter_markers=LAUGHTER_MARKERS) -> np.ndarray:
    """[sentences_per_minute, word_count, laughter_ratio, depression_ratio].

    Duration is the span of the participant's own utterances, so interviewer
    turns never influence the features. A transcript without participant
    speech yields all zeros.
    """
    utts = transcript.by_speaker(participant_tag)
    if not utts:
        return np.zeros(4)
    duration_min = _participant_duration(utts) / 60.0
    if duration_min <= 0:
        raise ZeroDurationError("participant speech has zero duration")
    laugh = _marker_tokens(laughter_markers)
    n_words = n_laugh = n_dep = 0
    for u in utts:
        tokens = tokenize(u.text)
        words = [t for t in tokens if t not in laugh]
        n_laugh += len(tokens) - len(words)
        n_words += len(words)
        if dep_lexicon is not None:
            n_dep += _match_lexicon(u.text, words, dep_lexicon)
    denom = max(n_words, 1)
    return np.array([
        len(utts) / duration_min,
        float(n_words),
        n_laugh / denom,
        (n_dep / denom) / duration_min,
    ])


def sentiment_series(transcript: Transcript, participant_tag=DEFAULT_PARTICIPANT_TAG,
                     lexicon: Lexicon | None = None) -> list[int]:
    """One summed valence per participant utterance."""
    if lexicon is None:
        return [0 for _ in transcript.by_speaker(participant_tag)]
    return [int(_match_lexicon(u.text, tokenize(u.text), lexicon))
            for u in transcript.by_speaker(participant_tag)]


def sentiment_features(series) -> np.ndarray:
    s = np.asarray(series, dtype=np.float64)
    if s.size == 0:
        return np.zeros(8)
    mean = s.mean()
    std = 0.0 if np.ptp(s) == 0 else float(np.sqrt(np.mean((s - mean) ** 2)))
    return np.array([
        mean, np.median(s), s.min(), s.max(), std,
        np.mean(s > 0), np.mean(s < 0), s.sum(),
    ])


def extract_text_features(transcript: Transcript, participant_tag=DEFAULT_PARTICIPANT_TAG,
                          dep_lexicon: Lexicon | None = None,
                          sent_lexicon: Lexicon | None = None,
                          session_id: str = "",
                          laughter_markers=LAUGHTER_MARKERS) -> FeatureVector:
    basic = basic_text_features(transcript, participant_tag, dep_lexicon, laughter_markers)
    sent = sentiment_features(sentiment_series(transcript, participant_tag, sent_lexicon))
    return FeatureVector(session_id, Modality.TEXT, TEXT_FEATURE_NAMES,
                         np.concatenate([basic, sent]))


class TextFeatureExtractor(TransformerMixin, BaseEstimator):
    def __init__(self, participant_tag=DEFAULT_PARTICIPANT_TAG, dep_lexicon=None,
                 sent_lexicon=None, laughter_markers=LAUGHTER_MARKERS):
        self.participant_tag = participant_tag
        self.dep_lexicon = dep_lexicon
        self.sent_lexicon = sent_lexicon
        self.laughter_markers = laughter_markers

    def fit(self, X, y=None):
        self.n_features_out_ = len(TEXT_FEATURE_NAMES)
        return self

    def transform(self, X):
        return np.vstack([
            extract_text_features(t, self.participant_tag, self.dep_lexicon,
                                  self.sent_lexicon, laughter_markers=self.laughter_markers).values
            for t in X
        ])

    def get_feature_names_out(self, input_features=None):
        return np.asarray(TEXT_FEATURE_NAMES, dtype=object)
