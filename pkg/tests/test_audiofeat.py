import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depfusion.audiofeat import (
    STREAMS,
    AudioConfig,
    AudioFeatureExtractor,
    audio_feature_count,
    extract_audio_features,
)
from depfusion.datamodel import DescriptorSeries
from depfusion.exceptions import DepfusionError, EmptyInputError
from depfusion.ingest import COVAREP_NAMES


def random_series(n_frames=40, names=("F0", "VUV", "NAQ"), seed=0):
    rng = np.random.default_rng(seed)
    return DescriptorSeries(tuple(names), rng.normal(size=(n_frames, len(names))))


def brute_force_count(d, cfg):
    # enumerate features one by one instead of using the closed form
    n = 0
    for _ in range(d):
        for stream in STREAMS:
            if stream not in cfg.streams:
                continue
            n += cfg.dct_k
            if stream in cfg.stats_on:
                n += 4
    return n


def test_default_covarep_count():
    s = random_series(names=COVAREP_NAMES)
    fv = extract_audio_features(s)
    assert len(fv) == 74 * 42 == 3108


def test_single_descriptor_base_only():
    cfg = AudioConfig(streams={"base"}, stats_on={"base"})
    fv = extract_audio_features(random_series(names=("F0",)), cfg)
    assert len(fv) == 14
    assert fv.names[:2] == ("F0.base.dct0", "F0.base.dct1")
    assert fv.names[-4:] == ("F0.base.mean", "F0.base.median", "F0.base.std", "F0.base.peak_to_rms")


def test_constant_column_propagation():
    frames = np.column_stack([np.full(30, 2.0), np.random.default_rng(0).normal(size=30)])
    fv = extract_audio_features(DescriptorSeries(("C", "R"), frames)).as_dict()
    for stream in ("delta", "delta_delta"):
        assert all(fv[f"C.{stream}.dct{i}"] == 0 for i in range(10))
        assert fv[f"C.{stream}.std"] == 0
    assert fv["C.base.std"] == 0
    assert fv["C.base.peak_to_rms"] == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(1, 12), st.sets(st.sampled_from(STREAMS[1:])),
       st.sets(st.sampled_from(STREAMS)), st.sampled_from(["largest_magnitude", "first_k"]))
def test_count_formula(d, k, extra_streams, stats_on, selection):
    cfg = AudioConfig(dct_k=k, streams={"base"} | extra_streams, stats_on=stats_on,
                      dct_selection=selection)
    fv = extract_audio_features(random_series(names=[f"d{i}" for i in range(d)]), cfg)
    assert len(fv) == audio_feature_count(d, cfg) == brute_force_count(d, cfg)
    assert len(set(fv.names)) == len(fv.names)


def test_deterministic_bitwise():
    s = random_series()
    assert extract_audio_features(s).values.tobytes() == extract_audio_features(s).values.tobytes()


def test_scaling_linearity():
    s = random_series(seed=4)
    alpha = -2.5
    scaled = DescriptorSeries(s.descriptor_names, s.frames * alpha)
    a, b = extract_audio_features(s).as_dict(), extract_audio_features(scaled).as_dict()
    for name in a:
        if ".dct" in name:
            assert b[name] == pytest.approx(alpha * a[name], rel=1e-9, abs=1e-12)
        if name.endswith("peak_to_rms"):
            assert b[name] == pytest.approx(a[name], rel=1e-12)


def test_voiced_only_drops_unvoiced_frames():
    frames = np.array([[100.0, 1], [0.0, 0], [200.0, 1], [0.0, 0]])
    s = DescriptorSeries(("F0", "VUV"), frames)
    fv = extract_audio_features(s, AudioConfig(voiced_only=True)).as_dict()
    assert fv["F0.base.mean"] == 150.0
    assert extract_audio_features(s).as_dict()["F0.base.mean"] == 75.0


@pytest.mark.parametrize("kwargs", [dict(dct_k=0), dict(streams=set()), dict(dct_selection="x")])
def test_config_invariants(kwargs):
    with pytest.raises(DepfusionError):
        AudioConfig(**kwargs)


def test_empty_series():
    with pytest.raises(EmptyInputError):
        extract_audio_features(DescriptorSeries(("F0",), np.zeros((0, 1))))


def test_transformer_api():
    series = [random_series(seed=i) for i in range(3)]
    ext = AudioFeatureExtractor(dct_k=5)
    X = ext.fit_transform(series)
    assert X.shape == (3, 3 * 3 * 9)
    assert len(ext.get_feature_names_out()) == X.shape[1]
    assert ext.get_params()["dct_k"] == 5
