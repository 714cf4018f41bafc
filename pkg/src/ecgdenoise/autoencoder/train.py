"""Mini-batch Adam training on (noisy, clean) pairs and segment-level denoising."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..segment import EcgSegment
from .model import (AutoencoderConfig, ModelWeights, NumericalError, compute_gradients,
                    forward, init_weights)

log = logging.getLogger(__name__)


class TrainingDiverged(NumericalError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 8
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    # train on random windows of this many samples (None: whole segments)
    crop_length: int | None = None

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.crop_length is not None and self.crop_length < 1:
            raise ValueError("crop_length must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def normalization_constants(x: np.ndarray, mode: str):
    """Per-lead ``(offset, scale)`` with ``x_norm = (x - offset) / scale``."""
    c = x.shape[-2]
    offset = np.zeros((c, 1))
    scale = np.ones((c, 1))
    if mode in ("scale", "zscore"):
        std = x.std(axis=-1, keepdims=True)
        scale = np.where(std > 1e-12, std, 1.0)
    if mode == "zscore":
        offset = x.mean(axis=-1, keepdims=True)
    return offset, scale


def _pair_arrays(pair, config: AutoencoderConfig):
    if isinstance(pair, tuple):
        x, t = pair
        return np.asarray(x, dtype=np.float64), np.asarray(t, dtype=np.float64)
    x = pair.input.select(config.input_leads).data
    t = pair.target.select(config.input_leads).data
    return np.array(x), np.array(t)


def prepare_arrays(pairs, config: AutoencoderConfig):
    """Stack pairs into ``(M, C, N)`` input/target arrays in model space."""
    xs, ts = [], []
    for pair in pairs:
        x, t = _pair_arrays(pair, config)
        if x.shape != t.shape or x.shape[0] != config.input_channels:
            raise ValueError(f"pair shape {x.shape}/{t.shape} does not fit the model")
        offset, scale = normalization_constants(x, config.normalization)
        xs.append((x - offset) / scale)
        ts.append((t - offset) / scale)
    lengths = {x.shape[1] for x in xs}
    if len(lengths) != 1:
        raise ValueError("all pairs must have the same length")
    return np.stack(xs), np.stack(ts)


class Adam:
    def __init__(self, weights: ModelWeights, cfg: TrainConfig):
        self.cfg = cfg
        self.m = [np.zeros_like(a) for a in weights.arrays()]
        self.v = [np.zeros_like(a) for a in weights.arrays()]
        self.t = 0

    def step(self, weights: ModelWeights, grads: ModelWeights) -> None:
        cfg = self.cfg
        self.t += 1
        c1 = 1.0 - cfg.beta1 ** self.t
        c2 = 1.0 - cfg.beta2 ** self.t
        for p, g, m, v in zip(weights.arrays(), grads.arrays(), self.m, self.v):
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * g * g
            p -= cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + cfg.eps)


def train(pairs, config: AutoencoderConfig, train_cfg: TrainConfig,
          initial: ModelWeights | None = None, callback=None):
    """Fit the autoencoder; returns ``(weights, per-epoch mean training loss)``.

    ``pairs`` holds :class:`~ecgdenoise.noise.DatasetPair` objects or
    ``(input, target)`` arrays of shape ``(C, N)``.  Everything random (init,
    shuffling, crops) comes from ``train_cfg.seed``.  ``callback(epoch, loss,
    weights)`` is called after every epoch.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("training set is empty")
    x_all, t_all = prepare_arrays(pairs, config)
    weights = init_weights(config, train_cfg.seed) if initial is None else initial.copy()
    weights.check(config)
    rng = np.random.default_rng([train_cfg.seed, 1])
    opt = Adam(weights, train_cfg)
    m, _, n = x_all.shape
    crop = train_cfg.crop_length
    if crop is not None and crop >= n:
        crop = None
    history = []
    for epoch in range(train_cfg.epochs):
        order = rng.permutation(m)
        total = 0.0
        for start in range(0, m, train_cfg.batch_size):
            idx = order[start:start + train_cfg.batch_size]
            xb, tb = x_all[idx], t_all[idx]
            if crop is not None:
                offs = rng.integers(0, n - crop + 1, size=len(idx))
                xb = np.stack([xb[j, :, o:o + crop] for j, o in enumerate(offs)])
                tb = np.stack([tb[j, :, o:o + crop] for j, o in enumerate(offs)])
            try:
                loss, grads = compute_gradients(weights, config, xb, tb)
            except NumericalError as exc:
                raise TrainingDiverged(f"epoch {epoch}, batch at {start}: {exc}") from exc
            opt.step(weights, grads)
            total += loss * len(idx)
        epoch_loss = total / m
        if not np.isfinite(epoch_loss):
            raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
        history.append(epoch_loss)
        log.info("epoch %d loss %.6g", epoch, epoch_loss)
        if callback is not None:
            callback(epoch, epoch_loss, weights)
    return weights, history


def denoise_array(weights: ModelWeights, config: AutoencoderConfig, x) -> np.ndarray:
    """Denoise a ``(C, N)`` array in millivolts (normalization handled here)."""
    x = np.asarray(x, dtype=np.float64)
    offset, scale = normalization_constants(x, config.normalization)
    y = forward(weights, config, (x - offset) / scale)
    return y * scale + offset


def denoise_segment(weights: ModelWeights, config: AutoencoderConfig,
                    segment: EcgSegment) -> EcgSegment:
    """Replace the model's input leads of ``segment`` by their denoised version.

    Leads the model does not consume are returned unchanged.
    """
    x = segment.select(config.input_leads).data
    y = denoise_array(weights, config, x)
    data = np.array(segment.data)
    for row, lead in enumerate(config.input_leads):
        data[segment.lead_index(lead)] = y[row]
    return segment.with_data(data)
