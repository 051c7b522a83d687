"""Command-line interface: ``synth``, ``extract``, ``train``, ``predict``, ``evaluate``.

Exit codes: 0 success, 1 partial failure (some sessions skipped), 2 fatal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .datamodel import Modality, Split, clamp_phq8
from .evaluation import FEATURE_LABELS, FUSION_LABEL, TABLE_ORDER, MetricsRow, format_metrics_csv, format_metrics_table
from .exceptions import DepfusionError, DimensionMismatchError, MissingLabelError
from .forest import ConfidenceForestRegressor, PredictionWithConfidence
from .fusion import Strategy, fuse
from .ingest import format_feature_csv, parse_feature_csv, parse_labels
from .pipeline import extract_all
from .synth import SynthConfig, synth_generate

log = logging.getLogger("depfusion")

EXIT_OK, EXIT_PARTIAL, EXIT_FATAL = 0, 1, 2
MODALITIES = [m.value for m in Modality]
PREDICTION_COLUMNS = (
    ["session_id"]
    + [f"{m}_{k}" for m in MODALITIES for k in ("mean", "std")]
    + ["chosen_modality", "fused", "strategy", "include_gender"]
)


class CommandError(Exception):
    def __init__(self, message, code=EXIT_FATAL):
        super().__init__(message)
        self.code = code


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def _out_dir(cfg: RunConfig) -> Path:
    return Path(cfg.out) if cfg.out is not None else Path.cwd()


def _read_labels(path):
    return parse_labels(Path(path).read_text(encoding="utf-8"))


def _read_features(path, modality):
    return parse_feature_csv(Path(path).read_text(encoding="utf-8"), modality)


def _strip_comments(text):
    return "\n".join(line for line in text.splitlines() if not line.startswith("#"))


# ---------------------------------------------------------------------------


def cmd_synth(args, cfg: RunConfig):
    noise = {}
    for item in args.noise or []:
        key, _, value = item.partition("=")
        noise[Modality(key.strip())] = float(value)
    synth = SynthConfig(n_sessions=args.n_sessions, seed=cfg.seed,
                        informative_modality=args.informative, noise_levels=noise,
                        n_audio_frames=args.audio_frames, n_video_frames=args.video_frames,
                        dev_fraction=args.dev_fraction)
    out = _out_dir(cfg)
    records = synth_generate(synth, out)
    print(f"generated {len(records)} sessions under {out}")
    return EXIT_OK


def cmd_extract(args, cfg: RunConfig):
    if cfg.data_root is None:
        raise CommandError("no data root given (--data-root or data_root in config)")
    modalities = MODALITIES if args.modality == "all" else [args.modality]
    code = EXIT_OK
    for modality in modalities:
        vectors, failures = extract_all(cfg.data_root, modality, cfg, cfg.jobs)
        if not vectors and not failures:
            raise CommandError(f"no sessions found under {cfg.data_root}")
        if not vectors:
            raise CommandError(f"all {len(failures)} {modality} extractions failed")
        _write(_out_dir(cfg) / f"{modality}_features.csv",
               format_feature_csv(vectors, comment=cfg.provenance()))
        print(f"{modality}: {len(vectors)} sessions x {len(vectors[0])} features"
              + (f", {len(failures)} failed" if failures else ""))
        if failures:
            code = EXIT_PARTIAL
    return code


def _training_rows(vectors, records, train_split):
    by_id = {r.session_id: r for r in records}
    rows, targets, genders = [], [], []
    for fv in sorted(vectors, key=lambda v: v.session_id):
        rec = by_id.get(fv.session_id)
        if rec is None:
            raise MissingLabelError(fv.session_id)
        if rec.split != train_split:
            continue
        if rec.phq8 is None:
            raise MissingLabelError(fv.session_id)
        rows.append(fv.values)
        targets.append(float(rec.phq8))
        genders.append(float(rec.gender))
    return rows, targets, genders


def cmd_train(args, cfg: RunConfig):
    cfg.require("labels")
    records = _read_labels(cfg.labels)
    out = _out_dir(cfg)
    manifest = {"tool_version": __version__, "config_hash": cfg.config_hash(), "seed": cfg.seed,
                "include_gender": cfg.include_gender, "models": {}}
    for modality in MODALITIES:
        path = getattr(args, modality)
        if path is None:
            raise CommandError(f"--{modality} feature CSV is required")
        vectors = _read_features(path, modality)
        if not vectors:
            raise CommandError(f"{path}: no feature rows")
        rows, y, genders = _training_rows(vectors, records, Split(args.train_split))
        if not rows:
            raise CommandError(f"{modality}: no labelled {args.train_split} sessions")
        X = np.vstack(rows)
        names = list(vectors[0].names)
        if cfg.include_gender:
            X = np.column_stack([X, genders])
            names.append("gender")
        p = cfg.forest_params()
        model = ConfidenceForestRegressor(p.n_trees, p.max_depth, p.min_samples_leaf, p.mtry,
                                          p.bootstrap, p.seed, cfg.jobs).fit(X, y)
        meta = {"modality": modality, "feature_names": names,
                "include_gender": cfg.include_gender, "provenance": cfg.provenance()}
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{modality}.model").write_bytes(model.to_bytes(meta))
        manifest["models"][modality] = {"file": f"{modality}.model", "n_train": len(y),
                                        "n_features": X.shape[1]}
        print(f"{modality}: trained {p.n_trees} trees on {X.shape[0]} x {X.shape[1]}")
    _write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_predict(args, cfg: RunConfig):
    models_dir = Path(args.models)
    models = {}
    for modality in MODALITIES:
        models[modality] = ConfidenceForestRegressor.from_bytes(
            (models_dir / f"{modality}.model").read_bytes())
    include_gender = bool(models["audio"].metadata_.get("include_gender", False))
    genders = {}
    if include_gender:
        cfg.require("labels")
        genders = {r.session_id: r.gender for r in _read_labels(cfg.labels)}

    features = {}
    for modality in MODALITIES:
        path = getattr(args, modality)
        if path is None:
            raise CommandError(f"--{modality} feature CSV is required")
        features[modality] = {fv.session_id: fv for fv in _read_features(path, modality)}

    ids = sorted(set.intersection(*(set(f) for f in features.values())))
    skipped = sorted(set.union(*(set(f) for f in features.values())) - set(ids))
    if include_gender:
        skipped += [s for s in ids if s not in genders]
        ids = [s for s in ids if s in genders]
    if not ids:
        raise CommandError("no session has features for all three modalities")

    per_modality = {}
    for modality in MODALITIES:
        X = np.vstack([features[modality][s].values for s in ids])
        if include_gender:
            X = np.column_stack([X, [genders[s] for s in ids]])
        model = models[modality]
        if X.shape[1] != model.n_features_in_:
            raise DimensionMismatchError(
                f"{modality}: features have {X.shape[1]} columns, model expects {model.n_features_in_}")
        per_modality[modality] = model.predict_with_std(X)

    strategy = Strategy(cfg.strategy)
    buf = io.StringIO()
    buf.write(f"# {cfg.provenance()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PREDICTION_COLUMNS)
    for i, sid in enumerate(ids):
        inputs = [PredictionWithConfidence(float(per_modality[m][0][i]), float(per_modality[m][1][i]),
                                           Modality(m)) for m in MODALITIES]
        result = fuse(inputs, strategy)
        chosen = result.chosen_modality
        chosen = chosen.value if isinstance(chosen, Modality) else chosen
        row = [sid]
        for p in inputs:
            row += [repr(p.mean), repr(p.std)]
        row += [chosen, repr(float(clamp_phq8(result.final))), strategy.value, int(include_gender)]
        writer.writerow(row)
    _write(_out_dir(cfg) / "predictions.csv", buf.getvalue())
    for s in skipped:
        log.warning("%s: skipped (missing features or gender)", s)
    print(f"predicted {len(ids)} sessions with {strategy.value}")
    return EXIT_PARTIAL if skipped else EXIT_OK


def cmd_evaluate(args, cfg: RunConfig):
    cfg.require("labels")
    records = {r.session_id: r for r in _read_labels(cfg.labels)}
    text = Path(args.predictions).read_text(encoding="utf-8")
    rows = list(csv.DictReader(io.StringIO(_strip_comments(text))))
    if not rows:
        raise CommandError("predictions file has no rows")
    missing = [r["session_id"] for r in rows if r["session_id"] not in records]
    include_gender = bool(int(rows[0]["include_gender"]))
    metrics = []
    for split in (Split.DEVELOPMENT, Split.TRAIN, Split.TEST):
        sel = [r for r in rows if r["session_id"] in records
               and records[r["session_id"]].split == split
               and records[r["session_id"]].phq8 is not None]
        if not sel:
            continue
        truth = [records[r["session_id"]].phq8 for r in sel]
        for modality in TABLE_ORDER:
            pred = [float(r[f"{modality.value}_mean"]) for r in sel]
            metrics.append(MetricsRow.score(FEATURE_LABELS[modality], split, pred, truth,
                                            include_gender))
        metrics.append(MetricsRow.score(FUSION_LABEL, split, [float(r["fused"]) for r in sel],
                                        truth, include_gender))
    if not metrics:
        raise CommandError("no labelled sessions among the predictions")
    strategy = rows[0]["strategy"]
    _write(_out_dir(cfg) / "metrics.csv",
           format_metrics_csv(metrics, comment=f"{cfg.provenance()} strategy={strategy}"))
    print(format_metrics_table(metrics))
    for s in missing:
        log.warning("%s: no label, not scored", s)
    return EXIT_PARTIAL if missing else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value run configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="worker threads (outputs do not depend on it)")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="depfusion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"depfusion {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic session tree")
    p.add_argument("--n-sessions", type=int, default=200)
    p.add_argument("--informative", choices=MODALITIES, default="audio")
    p.add_argument("--noise", action="append", metavar="MODALITY=LEVEL")
    p.add_argument("--audio-frames", type=int, default=100)
    p.add_argument("--video-frames", type=int, default=30)
    p.add_argument("--dev-fraction", type=float, default=0.3)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", parents=[common], help="write one modality's feature CSV")
    p.add_argument("modality", choices=MODALITIES + ["all"])
    p.add_argument("--data-root", type=Path)
    p.add_argument("--sentiment-lexicon", type=Path)
    p.add_argument("--depression-lexicon", type=Path)
    p.add_argument("--participant-tag")
    p.add_argument("--dct-k", type=int)
    p.add_argument("--delta-window", type=int)
    p.add_argument("--dct-selection", choices=["largest_magnitude", "first_k"])
    p.add_argument("--voiced-only", action="store_const", const=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", parents=[common], help="fit one forest per modality")
    for m in MODALITIES:
        p.add_argument(f"--{m}", type=Path, help=f"{m} feature CSV")
    p.add_argument("--labels", type=Path)
    p.add_argument("--train-split", choices=[s.value for s in Split], default="train")
    p.add_argument("--include-gender", action="store_const", const=True)
    p.add_argument("--n-trees", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--min-samples-leaf", type=int)
    p.add_argument("--mtry", type=int)
    p.add_argument("--no-bootstrap", dest="bootstrap", action="store_const", const=False)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="fuse per-modality predictions")
    p.add_argument("--models", type=Path, required=True, help="directory written by train")
    for m in MODALITIES:
        p.add_argument(f"--{m}", type=Path, help=f"{m} feature CSV")
    p.add_argument("--labels", type=Path, help="manifest (needed for the gender column)")
    p.add_argument("--strategy", choices=[s.value for s in Strategy])
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common], help="RMSE/MAE per split")
    p.add_argument("--predictions", type=Path, required=True)
    p.add_argument("--labels", type=Path)
    p.set_defaults(func=cmd_evaluate)
    return parser


_FLAG_KEYS = ("seed", "jobs", "out", "data_root", "sentiment_lexicon", "depression_lexicon",
              "participant_tag", "dct_k", "delta_window", "dct_selection", "voiced_only",
              "labels", "include_gender", "n_trees", "max_depth", "min_samples_leaf", "mtry",
              "bootstrap", "strategy")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    overrides = {k: getattr(args, k) for k in _FLAG_KEYS if hasattr(args, k)}
    try:
        cfg = load_config(args.config, overrides)
        return args.func(args, cfg)
    except CommandError as exc:
        print(f"depfusion {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (DepfusionError, OSError) as exc:
        print(f"depfusion {args.command}: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
