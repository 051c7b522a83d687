"""Decision-level fusion of per-modality predictions.

The confidence of a modality is the spread of its trees: lower std means
higher confidence. ``winner_take_all`` returns the prediction of the most
confident modality; ``average`` and ``confidence_weighted`` exist for
comparison.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, clone

from .datamodel import Modality
from .exceptions import DepfusionError, EmptyInputError, StrategyMismatchError
from .forest import ConfidenceForestRegressor, PredictionWithConfidence

# tie-break order among equally confident modalities
MODALITY_PRIORITY = (Modality.AUDIO, Modality.TEXT, Modality.VIDEO)
WEIGHT_EPS = 1e-6
BLEND = "blend"


class Strategy(str, enum.Enum):
    WINNER_TAKE_ALL = "winner_take_all"
    AVERAGE = "average"
    CONFIDENCE_WEIGHTED = "confidence_weighted"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class FusionResult:
    final: float
    chosen_modality: Modality | str
    inputs: tuple[PredictionWithConfidence, ...]
    strategy: Strategy


def _priority(modality):
    return MODALITY_PRIORITY.index(Modality(modality))


def confidence_rank(inputs):
    """Inputs ordered from most to least confident."""
    inputs = list(inputs)
    if not inputs:
        raise EmptyInputError("nothing to rank")
    return sorted(inputs, key=lambda p: (p.std, _priority(p.modality)))


def fuse(inputs, strategy=Strategy.WINNER_TAKE_ALL) -> FusionResult:
    inputs = tuple(inputs)
    strategy = Strategy(strategy)
    if not inputs:
        raise EmptyInputError("no predictions to fuse")
    if any(p.std < 0 for p in inputs):
        raise DepfusionError("confidence std must be non-negative")
    if strategy is Strategy.WINNER_TAKE_ALL:
        top = confidence_rank(inputs)[0]
        return FusionResult(top.mean, Modality(top.modality), inputs, strategy)
    means = np.array([p.mean for p in inputs])
    if strategy is Strategy.AVERAGE:
        final = float(np.mean(means))
    else:
        w = 1.0 / (np.array([p.std for p in inputs]) + WEIGHT_EPS)
        final = float(np.dot(w / w.sum(), means))
    return FusionResult(final, BLEND, inputs, strategy)


@dataclass(frozen=True)
class DominanceReport:
    counts: dict
    fractions: dict
    total: int

    def ranking(self):
        return sorted(self.counts, key=lambda m: (-self.counts[m], _priority(m)))


def dominance_report(results) -> DominanceReport:
    """How often each modality won under winner-take-all."""
    results = list(results)
    if any(r.strategy is not Strategy.WINNER_TAKE_ALL for r in results):
        raise StrategyMismatchError("dominance is only defined for winner_take_all results")
    counts = Counter(Modality(r.chosen_modality) for r in results)
    total = len(results)
    counts = {m: counts[m] for m in MODALITY_PRIORITY if counts[m]}
    fractions = {m: c / total for m, c in counts.items()}
    return DominanceReport(counts, fractions, total)


class ConfidenceFusionRegressor(RegressorMixin, BaseEstimator):
    """One confidence forest per modality, fused at the decision level.

    ``X`` is a mapping ``modality -> design matrix`` with aligned rows.
    """

    def __init__(self, estimator=None, strategy="winner_take_all",
                 modalities=("audio", "video", "text")):
        self.estimator = estimator
        self.strategy = strategy
        self.modalities = modalities

    def fit(self, X, y):
        base = self.estimator if self.estimator is not None else ConfidenceForestRegressor()
        self.estimators_ = {}
        for m in self.modalities:
            self.estimators_[Modality(m)] = clone(base).fit(X[m] if m in X else X[Modality(m)], y)
        return self

    def _inputs(self, X):
        per_modality = []
        for m, est in self.estimators_.items():
            per_modality.append(est.predict_confidence(X[m.value] if m.value in X else X[m], m))
        return list(zip(*per_modality))

    def fuse_rows(self, X):
        return [fuse(row, self.strategy) for row in self._inputs(X)]

    def predict(self, X):
        return np.array([r.final for r in self.fuse_rows(X)])
