"""Error metrics and the train/development experiment behind the results table."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .datamodel import Dataset, Modality, Split, assemble_design_matrix, clamp_phq8
from .exceptions import DepfusionError, EmptyInputError, MissingSplitError
from .forest import ConfidenceForestRegressor, ForestParams, PredictionWithConfidence
from .fusion import DominanceReport, Strategy, dominance_report, fuse

log = logging.getLogger(__name__)

FEATURE_LABELS = {
    Modality.VIDEO: "visual only",
    Modality.AUDIO: "audio only",
    Modality.TEXT: "text only",
}
FUSION_LABEL = "fusion"
TABLE_ORDER = (Modality.VIDEO, Modality.AUDIO, Modality.TEXT)
METRICS_COLUMNS = ("feature_used", "split", "rmse", "mae", "gender_flag")


def _pair(pred, truth):
    pred = np.asarray(pred, dtype=np.float64).ravel()
    truth = np.asarray(truth, dtype=np.float64).ravel()
    if pred.shape != truth.shape:
        raise DepfusionError(f"length mismatch: {pred.size} predictions, {truth.size} targets")
    if pred.size == 0:
        raise EmptyInputError("no predictions to score")
    return pred, truth


def rmse(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def mae(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    return float(np.mean(np.abs(pred - truth)))


@dataclass(frozen=True)
class MetricsRow:
    feature_used: str
    split: Split
    rmse: float
    mae: float
    include_gender: bool

    @classmethod
    def score(cls, feature_used, split, pred, truth, include_gender):
        clamped = clamp_phq8(pred)
        return cls(feature_used, Split(split), rmse(clamped, truth), mae(clamped, truth),
                   bool(include_gender))


@dataclass
class SplitPredictions:
    session_ids: list
    truth: np.ndarray
    mean: dict = field(default_factory=dict)  # modality -> unclamped forest means
    std: dict = field(default_factory=dict)

    def inputs(self, i):
        return [PredictionWithConfidence(float(self.mean[m][i]), float(self.std[m][i]), m)
                for m in self.mean]

    def fused(self, strategy):
        return [fuse(self.inputs(i), strategy) for i in range(len(self.session_ids))]


@dataclass
class ExperimentResult:
    rows: list
    dominance: DominanceReport
    predictions: dict  # Split -> SplitPredictions
    design_widths: dict  # Modality -> number of design-matrix columns
    include_gender: bool
    strategy: Strategy

    def row(self, feature_used, split):
        for r in self.rows:
            if r.feature_used == feature_used and r.split == Split(split):
                return r
        raise KeyError((feature_used, split))

    def fusion_row(self, split, strategy):
        """Score another fusion strategy on the already-trained forests."""
        preds = self.predictions[Split(split)]
        final = [r.final for r in preds.fused(strategy)]
        return MetricsRow.score(FUSION_LABEL, split, final, preds.truth, self.include_gender)


def run_experiment(dataset: Dataset, forest_params: ForestParams | None = None,
                   fusion_strategy=Strategy.WINNER_TAKE_ALL, include_gender=False,
                   n_jobs=1) -> ExperimentResult:
    """Train one forest per modality on the train split and score both splits.

    Development predictions come from the train-split models, with no refit.
    Rows follow the results-table layout: visual, audio, text, fusion for the
    development split, then the same for train.
    """
    params = forest_params or ForestParams()
    strategy = Strategy(fusion_strategy)
    splits = (Split.DEVELOPMENT, Split.TRAIN)
    for split in splits:
        if not any(r.split == split for r in dataset.records):
            raise MissingSplitError(f"dataset has no {split.value} sessions")

    preds = dict.fromkeys(splits)
    widths = {}
    for modality in TABLE_ORDER:
        X_tr, y_tr, _ = assemble_design_matrix(dataset, modality, include_gender, Split.TRAIN)
        widths[modality] = X_tr.shape[1]
        log.info("%s: design matrix %d x %d (include_gender=%s)",
                 modality.value, X_tr.shape[0], X_tr.shape[1], include_gender)
        model = ConfidenceForestRegressor(params.n_trees, params.max_depth,
                                          params.min_samples_leaf, params.mtry,
                                          params.bootstrap, params.seed, n_jobs).fit(X_tr, y_tr)
        for split in splits:
            X, y, ids = assemble_design_matrix(dataset, modality, include_gender, split)
            if preds[split] is None:
                preds[split] = SplitPredictions(ids, y)
            mean, std = model.predict_with_std(X)
            preds[split].mean[modality] = mean
            preds[split].std[modality] = std

    rows = []
    for split in splits:
        p = preds[split]
        for modality in TABLE_ORDER:
            rows.append(MetricsRow.score(FEATURE_LABELS[modality], split, p.mean[modality],
                                         p.truth, include_gender))
        final = [r.final for r in p.fused(strategy)]
        rows.append(MetricsRow.score(FUSION_LABEL, split, final, p.truth, include_gender))

    dominance = dominance_report(preds[Split.DEVELOPMENT].fused(Strategy.WINNER_TAKE_ALL))
    return ExperimentResult(rows, dominance, preds, widths, bool(include_gender), strategy)


def format_metrics_csv(rows, comment=None) -> str:
    out = io.StringIO()
    if comment:
        out.write(f"# {comment}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(METRICS_COLUMNS)
    for r in rows:
        writer.writerow([r.feature_used, r.split.value, repr(r.rmse), repr(r.mae),
                         int(r.include_gender)])
    return out.getvalue()


def format_metrics_table(rows) -> str:
    header = f"{'feature_used':<14} {'split':<12} {'RMSE':>8} {'MAE':>8}  gender"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(f"{r.feature_used:<14} {r.split.value:<12} {r.rmse:8.4f} {r.mae:8.4f}"
                     f"  {'yes' if r.include_gender else 'no'}")
    return "\n".join(lines)
