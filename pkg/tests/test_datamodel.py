import numpy as np
import pytest

from depfusion.datamodel import (
    Dataset,
    DescriptorSeries,
    FeatureVector,
    LandmarkSeries,
    SessionRecord,
    Transcript,
    Utterance,
    assemble_design_matrix,
    clamp_phq8,
)
from depfusion.exceptions import DepfusionError, MissingFeaturesError, MissingLabelError


def video_vector(sid, seed):
    values = np.random.default_rng(seed).normal(size=133)
    return FeatureVector(sid, "video", [f"f{i}" for i in range(133)], values)


def make_dataset(records):
    feats = {(r.session_id, "video"): video_vector(r.session_id, i) for i, r in enumerate(records)}
    return Dataset(records, feats)


RECORDS = (SessionRecord("s2", 1, 5, "train"), SessionRecord("s1", 0, 12, "train"))


class TestRecords:
    @pytest.mark.parametrize("kwargs", [
        dict(session_id="", gender=0), dict(session_id="a", gender=2),
        dict(session_id="a", gender=0, phq8=25), dict(session_id="a", gender=0, phq8=-1),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(DepfusionError):
            SessionRecord(**kwargs)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(DepfusionError):
            Dataset((SessionRecord("a", 0, 1), SessionRecord("a", 1, 2)))


class TestTypes:
    def test_descriptor_series_checks(self):
        with pytest.raises(DepfusionError):
            DescriptorSeries(("a",), np.zeros((2, 2)))
        with pytest.raises(DepfusionError):
            DescriptorSeries(("a",), np.zeros((2, 1)), frame_period=0)

    def test_landmarks_need_68_points(self):
        with pytest.raises(DepfusionError):
            LandmarkSeries(np.zeros((1, 67, 2)), [0.0])

    def test_arrays_are_read_only(self):
        fv = video_vector("s", 0)
        with pytest.raises(ValueError):
            fv.values[0] = 1.0

    def test_feature_vector_finite_and_unique(self):
        with pytest.raises(DepfusionError):
            FeatureVector("s", "text", ["a", "a"], [1, 2])
        with pytest.raises(DepfusionError):
            FeatureVector("s", "text", ["a"], [np.inf])

    def test_transcript_duration(self):
        t = Transcript([Utterance(1.0, 2.0, "Ellie", "hi"), Utterance(2.5, 6.0, "Participant", "ok")])
        assert t.duration == 5.0
        with pytest.raises(DepfusionError):
            Utterance(2.0, 1.0, "x", "y")

    def test_clamp(self):
        assert clamp_phq8([-3, 4.5, 30]).tolist() == [0, 4.5, 24]


class TestDesignMatrix:
    def test_shapes(self):
        ds = make_dataset(RECORDS)
        X, y, ids = assemble_design_matrix(ds, "video", include_gender=False)
        assert X.shape == (2, 133)
        X2, _, _ = assemble_design_matrix(ds, "video", include_gender=True)
        assert X2.shape == (2, 134)
        assert X2[:, -1].tolist() == [0.0, 1.0]
        assert np.array_equal(X2[:, :-1], X)

    def test_sorted_rows_and_permutation_invariance(self):
        ds = make_dataset(RECORDS)
        flipped = Dataset(tuple(reversed(ds.records)), ds.features)
        X, y, ids = assemble_design_matrix(ds, "video")
        Xf, yf, idsf = assemble_design_matrix(flipped, "video")
        assert ids == idsf == ["s1", "s2"]
        assert y.tolist() == [12.0, 5.0]
        assert X.tobytes() == Xf.tobytes()

    def test_missing_label(self):
        ds = make_dataset(RECORDS + (SessionRecord("s3", 0, None, "train"),))
        with pytest.raises(MissingLabelError, match="s3"):
            assemble_design_matrix(ds, "video")

    def test_missing_features(self):
        ds = Dataset(RECORDS, {("s1", "video"): video_vector("s1", 0)})
        with pytest.raises(MissingFeaturesError, match="s2"):
            assemble_design_matrix(ds, "video")

    def test_split_filter(self):
        recs = RECORDS + (SessionRecord("s0", 0, 3, "development"),)
        X, y, ids = assemble_design_matrix(make_dataset(recs), "video", split="development")
        assert ids == ["s0"]
