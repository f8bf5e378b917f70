"""Data ingestion, metrics, synthetic generators and the experiment runner."""

from .data import FrameStack, IngestError, IOSequence, RatingsData, load_frames, load_io, load_ratings
from .experiment import ConfigError, load_config, run_experiment
from .generate import generate, generate_lowrank, generate_lti, generate_twosource
from .metrics import match_sources, matcomp_rmse, sysid_score

__all__ = [
    "FrameStack",
    "RatingsData",
    "IOSequence",
    "IngestError",
    "ConfigError",
    "load_frames",
    "load_ratings",
    "load_io",
    "load_config",
    "run_experiment",
    "generate",
    "generate_twosource",
    "generate_lowrank",
    "generate_lti",
    "match_sources",
    "sysid_score",
    "matcomp_rmse",
]
