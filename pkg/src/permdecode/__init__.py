"""Permutation codes for power-line communication and rank modulation,
their channels, minimum-distance baselines and a one-shot MLP decoder."""

from .codes import Codebook, CodeFamily, enumerate_code, is_member
from .harness import evaluate_bler, generate_dataset, run_sweep, train
from .neural import MlpSpec, init_weights, load_model, param_count, predict, save_model
from .perm import apply_translocation, hamming_distance, perm_to_matrix, ulam_distance
from .plc import PlcErrorPattern, PlcParams, apply_error_pattern, transmit
from .rm import RmParams, default_levels, encode_charges, read_ranking

__version__ = "0.1.0"

__all__ = [
    "CodeFamily",
    "Codebook",
    "MlpSpec",
    "PlcErrorPattern",
    "PlcParams",
    "RmParams",
    "apply_error_pattern",
    "apply_translocation",
    "default_levels",
    "encode_charges",
    "enumerate_code",
    "evaluate_bler",
    "generate_dataset",
    "hamming_distance",
    "init_weights",
    "is_member",
    "load_model",
    "param_count",
    "perm_to_matrix",
    "predict",
    "read_ranking",
    "run_sweep",
    "save_model",
    "train",
    "transmit",
    "ulam_distance",
]
