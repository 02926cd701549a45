"""Embedding-level fusion of text-dependent and text-independent speaker embeddings."""

from .data import SynthConfig, load_trials, make_datasets, pack, save_trials, to_arrays, unpack
from .estimators import (
    AverageFusion,
    CosineScorer,
    EnhancedScoreFusion,
    FoenetClassifier,
    ScoreFusion,
    load_system,
)
from .evaluation import compare_systems, eer, evaluate_by_scenario, frr_at_far
from .model import forward_trial, init_params, load_checkpoint, save_checkpoint, score
from .training import TrainConfig, grad_check, train

__version__ = "0.1.0"

__all__ = [
    "AverageFusion", "CosineScorer", "EnhancedScoreFusion", "FoenetClassifier",
    "ScoreFusion", "SynthConfig", "TrainConfig", "compare_systems", "eer",
    "evaluate_by_scenario", "forward_trial", "frr_at_far", "grad_check", "init_params",
    "load_checkpoint", "load_system", "load_trials", "make_datasets", "pack",
    "save_checkpoint", "save_trials", "score", "to_arrays", "train", "unpack",
]
