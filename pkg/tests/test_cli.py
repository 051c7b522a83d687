import csv
import io
import shutil

import numpy as np
import pytest

from depfusion.cli import EXIT_FATAL, EXIT_OK, EXIT_PARTIAL, PREDICTION_COLUMNS, main
from depfusion.evaluation import METRICS_COLUMNS
from depfusion.ingest import format_labels, parse_feature_csv, parse_labels


def read_rows(path):
    text = "\n".join(l for l in path.read_text().splitlines() if not l.startswith("#"))
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(scope="module")
def chain(tmp_path_factory):
    """synth -> extract all -> train, on a small tree."""
    root = tmp_path_factory.mktemp("cli")
    data, feats, models = root / "data", root / "feats", root / "models"
    assert main(["synth", "--seed", "5", "--n-sessions", "24", "--audio-frames", "30",
                 "--video-frames", "4", "--out", str(data)]) == EXIT_OK
    cfg = str(data / "depfusion.cfg")
    assert main(["extract", "all", "--config", cfg, "--out", str(feats)]) == EXIT_OK
    assert main(["train", "--config", cfg, "--n-trees", "15", "--out", str(models),
                 *feature_args(feats)]) == EXIT_OK
    return root, cfg


def feature_args(feats):
    return [a for m in ("audio", "video", "text") for a in (f"--{m}", str(feats / f"{m}_features.csv"))]


class TestExtract:
    def test_widths(self, chain):
        root, _ = chain
        widths = {m: {len(v) for v in parse_feature_csv((root / "feats" / f"{m}_features.csv").read_text(), m)}
                  for m in ("audio", "video", "text")}
        assert widths["video"] == {133} and widths["text"] == {12}
        assert len(widths["audio"]) == 1

    def test_provenance_line(self, chain):
        root, _ = chain
        first = (root / "feats" / "audio_features.csv").read_text().splitlines()[0]
        assert first.startswith("# depfusion 0.1.0 config=") and first.endswith("seed=5")

    def test_empty_root_is_fatal(self, tmp_path):
        (tmp_path / "empty").mkdir()
        assert main(["extract", "video", "--data-root", str(tmp_path / "empty"),
                     "--out", str(tmp_path)]) == EXIT_FATAL

    def test_missing_root_is_fatal(self, tmp_path):
        assert main(["extract", "audio", "--out", str(tmp_path)]) == EXIT_FATAL

    def test_partial_failure(self, chain, tmp_path):
        root, _ = chain
        src = root / "data" / "sessions"
        dst = tmp_path / "sessions"
        for sid in sorted(p.name for p in src.iterdir())[:3]:
            shutil.copytree(src / sid, dst / sid)
        bad = sorted(dst.iterdir())[1]
        (bad / "landmarks.csv").write_text("1,2,3\n4,5\n")
        assert main(["extract", "video", "--data-root", str(dst), "--out", str(tmp_path)]) == EXIT_PARTIAL
        rows = parse_feature_csv((tmp_path / "video_features.csv").read_text(), "video")
        assert len(rows) == 2 and bad.name not in {r.session_id for r in rows}


class TestTrain:
    def test_outputs(self, chain):
        root, _ = chain
        names = sorted(p.name for p in (root / "models").iterdir())
        assert names == ["audio.model", "manifest.json", "text.model", "video.model"]

    def test_same_seed_same_bytes(self, chain, tmp_path):
        root, cfg = chain
        assert main(["train", "--config", cfg, "--n-trees", "15", "--jobs", "3",
                     "--out", str(tmp_path), *feature_args(root / "feats")]) == EXIT_OK
        for m in ("audio", "video", "text"):
            assert (tmp_path / f"{m}.model").read_bytes() == (root / "models" / f"{m}.model").read_bytes()

    def test_unlabelled_session(self, chain, tmp_path, capsys):
        root, _ = chain
        records = parse_labels((root / "data" / "labels.csv").read_text())
        dropped = records[0].session_id
        labels = tmp_path / "labels.csv"
        labels.write_text(format_labels(records[1:]))
        code = main(["train", "--labels", str(labels), "--n-trees", "2", "--out", str(tmp_path),
                     *feature_args(root / "feats")])
        assert code == EXIT_FATAL and dropped in capsys.readouterr().err


class TestPredictEvaluate:
    def predict(self, chain, out, strategy):
        root, cfg = chain
        assert main(["predict", "--config", cfg, "--models", str(root / "models"),
                     "--strategy", strategy, "--out", str(out), *feature_args(root / "feats")]) == EXIT_OK
        return read_rows(out / "predictions.csv")

    def test_winner_take_all(self, chain, tmp_path):
        rows = self.predict(chain, tmp_path, "winner_take_all")
        assert list(rows[0]) == PREDICTION_COLUMNS and len(rows) == 24
        for r in rows:
            stds = {m: float(r[f"{m}_std"]) for m in ("audio", "video", "text")}
            assert stds[r["chosen_modality"]] == min(stds.values())
            assert float(r["fused"]) == float(r[f"{r['chosen_modality']}_mean"])

    def test_average(self, chain, tmp_path):
        for r in self.predict(chain, tmp_path, "average"):
            means = [float(r[f"{m}_mean"]) for m in ("audio", "video", "text")]
            assert float(r["fused"]) == pytest.approx(np.mean(means), abs=1e-12)

    def test_width_mismatch(self, chain, tmp_path, capsys):
        root, cfg = chain
        text = root / "feats" / "text_features.csv"
        lines = text.read_text().splitlines()
        cut = tmp_path / "text_features.csv"
        cut.write_text("\n".join(",".join(l.split(",")[:-1]) if not l.startswith("#") else l
                                 for l in lines) + "\n")
        args = feature_args(root / "feats")
        args[args.index(str(text))] = str(cut)
        code = main(["predict", "--config", cfg, "--models", str(root / "models"),
                     "--out", str(tmp_path), *args])
        assert code == EXIT_FATAL and "columns" in capsys.readouterr().err

    def test_evaluate(self, chain, tmp_path):
        _, cfg = chain
        self.predict(chain, tmp_path, "winner_take_all")
        assert main(["evaluate", "--config", cfg, "--predictions", str(tmp_path / "predictions.csv"),
                     "--out", str(tmp_path)]) == EXIT_OK
        rows = read_rows(tmp_path / "metrics.csv")
        assert tuple(rows[0]) == tuple(METRICS_COLUMNS) and len(rows) == 8
        assert [r["feature_used"] for r in rows[:4]] == ["visual only", "audio only", "text only", "fusion"]
        assert all(float(r["rmse"]) >= float(r["mae"]) for r in rows)
