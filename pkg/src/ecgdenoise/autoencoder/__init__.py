"""Convolutional denoising autoencoder with hand-written reverse-mode gradients."""
from .checkpoint import CheckpointError, load_weights, read_checkpoint, save_weights
from .model import (ArchitectureError, AutoencoderConfig, ModelWeights, NumericalError,
                    compute_gradients, forward, init_weights, mse_loss, zero_weights)
from .train import TrainConfig, TrainingDiverged, denoise_array, denoise_segment, train

__all__ = [
    "ArchitectureError", "AutoencoderConfig", "CheckpointError", "ModelWeights",
    "NumericalError", "TrainConfig", "TrainingDiverged", "compute_gradients",
    "denoise_array", "denoise_segment", "forward", "init_weights", "load_weights",
    "mse_loss", "read_checkpoint", "save_weights", "train", "zero_weights",
]
