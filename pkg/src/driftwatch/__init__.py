"""Drift-adaptive event detection for social-sensor text streams."""

from .config import PipelineConfig, parse_config
from .drift import DriftDetector, Schedule, next_action
from .ensemble import EnsembleConfig, ensemble_predict, model_weights
from .errors import ConfigError, DataError, DriftwatchError
from .features import (Centroid, FeatureVector, SparseVector, centroid,
                       cosine_distance, tokenize, vectorize)
from .geotime import (GridCell, LocationMemory, cell_center, cell_of,
                      chebyshev, spatiotemporal_match)
from .ingest import (GroundTruthEvent, SocialPost, SynthConfig,
                     generate_stream, read_events, read_posts, write_events,
                     write_posts)
from .labeler import (LabeledSet, Window, bin_posts, centroid_shift_report,
                      generate_training_data)
from .learners import (Hyper, LabeledSample, LinearModel, Metrics, evaluate,
                       predict, train, update)
from .pipeline import (BenchResult, DetectedEvent, RunResult, assign_windows,
                       bench, detect_events, run_windowed)
from .registry import ClassifierRecord, ClassifierStore, load, save

__version__ = "0.1.0"

__all__ = [
    "BenchResult", "Centroid", "ClassifierRecord", "ClassifierStore",
    "ConfigError", "DataError", "DetectedEvent", "DriftDetector",
    "DriftwatchError", "EnsembleConfig", "FeatureVector", "GridCell",
    "GroundTruthEvent", "Hyper", "LabeledSample", "LabeledSet", "LinearModel",
    "LocationMemory", "Metrics", "PipelineConfig", "RunResult", "Schedule",
    "SocialPost", "SparseVector", "SynthConfig", "Window", "assign_windows",
    "bench", "bin_posts", "cell_center", "cell_of", "centroid",
    "centroid_shift_report", "chebyshev", "cosine_distance", "detect_events",
    "ensemble_predict", "evaluate", "generate_stream",
    "generate_training_data", "load", "model_weights", "next_action",
    "parse_config", "predict", "read_events", "read_posts", "run_windowed",
    "save", "spatiotemporal_match", "tokenize", "train", "update",
    "vectorize", "write_events", "write_posts",
]
