"""Generalist graph anomaly detection with few-shot in-context scoring.

One detector is trained on a pool of labeled graphs and then scores nodes of
an unseen graph given only a handful of known-normal context nodes.
"""
from ._accel import backend
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import TrainConfig, load_config, save_config
from .data import Dataset, load_dataset, save_dataset
from .errors import ArcError, DataIOError, DimensionError, NonFiniteError, ValidationError
from .graph import EdgeList
from .inject import InjectionSpec, inject_combined
from .metrics import auprc, auroc
from .pipeline import evaluate, infer, smoothness_report, sweep_context_sizes, train_generalist

__version__ = "0.1.0"

__all__ = [
    "ArcError",
    "Checkpoint",
    "DataIOError",
    "Dataset",
    "DimensionError",
    "EdgeList",
    "InjectionSpec",
    "NonFiniteError",
    "TrainConfig",
    "ValidationError",
    "auprc",
    "auroc",
    "backend",
    "evaluate",
    "infer",
    "inject_combined",
    "load_checkpoint",
    "load_config",
    "load_dataset",
    "save_checkpoint",
    "save_config",
    "save_dataset",
    "smoothness_report",
    "sweep_context_sizes",
    "train_generalist",
]
