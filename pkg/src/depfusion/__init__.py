"""Multimodal depression-severity regression with confidence-based fusion."""

__version__ = "0.1.0"

from .audiofeat import AudioConfig, AudioFeatureExtractor, extract_audio_features  # noqa: E402
from .datamodel import Dataset, FeatureVector, Modality, SessionRecord, Split  # noqa: E402
from .evaluation import MetricsRow, mae, rmse, run_experiment  # noqa: E402
from .forest import ConfidenceForestRegressor, ForestParams, PredictionWithConfidence  # noqa: E402
from .fusion import ConfidenceFusionRegressor, Strategy, dominance_report, fuse  # noqa: E402
from .textfeat import TextFeatureExtractor, extract_text_features  # noqa: E402
from .videofeat import VideoFeatureExtractor, extract_video_features  # noqa: E402

__all__ = [
    "AudioConfig", "AudioFeatureExtractor", "ConfidenceForestRegressor", "ConfidenceFusionRegressor",
    "Dataset", "FeatureVector", "ForestParams", "MetricsRow", "Modality", "PredictionWithConfidence",
    "SessionRecord", "Split", "Strategy", "TextFeatureExtractor", "VideoFeatureExtractor",
    "dominance_report", "extract_audio_features", "extract_text_features", "extract_video_features",
    "fuse", "mae", "rmse", "run_experiment",
]
