"""pcnet: predictive coding networks with energy-based local learning.

A hierarchical generative model where each layer predicts the one below
and all adaptation descends a single squared-prediction-error energy:
latents move on the fast timescale (inference), weights on the slow one
(learning), both using layer-local quantities only. Includes a supervised
linear readout, CIFAR-10 binary ingestion, energy instrumentation,
binary checkpoints and a finite-difference verification oracle.
"""

from . import kernels, verify
from .checkpoint import load as load_checkpoint
from .checkpoint import save as save_checkpoint
from .data import (BatchPlan, Dataset, batches, load_cifar10, one_hot,
                   save_cifar10, synth_blobs)
from .energy import EnergyRecord, EnergyTrace, record, total_energy
from .errors import (ConfigError, DivergenceError, ModeError, PcnError,
                     ShapeError)
from .inference import (EarlyStop, InferenceSettings, inference_step,
                        latent_gradients, run_inference)
from .learning import (LearnSettings, apply_updates, readout_gradient,
                       run_learning, weight_gradients)
from .model import (ACTIVATIONS, Activation, ErrorBundle, GenerativeStack,
                    LatentBatch, ModelConfig, compute_errors, derive_seed,
                    forward_layer, init_latents, init_weights)
from .training import (EvalReport, TrainConfig, evaluate, top_k_hit, train)

__version__ = "0.1.0"

__all__ = [
    "ACTIVATIONS", "Activation", "BatchPlan", "ConfigError", "Dataset",
    "DivergenceError", "EarlyStop", "EnergyRecord", "EnergyTrace",
    "ErrorBundle", "EvalReport", "GenerativeStack", "InferenceSettings",
    "LatentBatch", "LearnSettings", "ModeError", "ModelConfig", "PcnError",
    "ShapeError", "TrainConfig", "apply_updates", "batches", "compute_errors",
    "derive_seed", "evaluate", "forward_layer", "inference_step",
    "init_latents", "init_weights", "kernels", "latent_gradients",
    "load_checkpoint", "load_cifar10", "one_hot", "readout_gradient",
    "record", "run_inference", "run_learning", "save_checkpoint",
    "save_cifar10", "synth_blobs", "top_k_hit", "total_energy", "train",
    "verify", "weight_gradients",
]
