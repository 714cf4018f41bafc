"""Convolutional denoising autoencoder: architecture, forward pass, exact gradients.

The network is a plain stack of stride-1, length-preserving 1D convolutions:
encoder channels, then decoder channels, each followed by a rectifier, then a
linear kernel-1 projection back to the input channel count.  With stride 1
there is no temporal bottleneck, only a channel-wise one.

Padding for a kernel of size ``k`` is ``(k - 1) // 2`` zeros on the left and the
remainder on the right (7 / 8 for ``k = 16``).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .. import kernels

NORMALIZATIONS = ("none", "scale", "zscore")


class ArchitectureError(ValueError):
    pass


class NumericalError(ArithmeticError):
    """Non-finite values in weights, inputs or intermediate results."""


@dataclass(frozen=True)
class AutoencoderConfig:
    input_channels: int = 2
    encoder_channels: tuple[int, ...] = (16, 32, 64, 128, 256, 512)
    decoder_channels: tuple[int, ...] = (512, 256, 128, 64, 32, 16)
    kernel_size: int = 16
    stride: int = 1
    output_kernel_size: int = 1
    input_leads: tuple[str, ...] = ("I", "II")
    # "none": raw mV; "scale": divide each lead by its std; "zscore": also centre
    normalization: str = "none"

    def __post_init__(self):
        for name in ("encoder_channels", "decoder_channels", "input_leads"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.stride != 1:
            raise ArchitectureError("only stride 1 is supported (length-preserving)")
        if self.kernel_size < 1 or self.output_kernel_size < 1:
            raise ArchitectureError("kernel sizes must be >= 1")
        if self.input_channels < 1 or not self.encoder_channels:
            raise ArchitectureError("need at least one input channel and one encoder layer")
        if any(c < 1 for c in self.encoder_channels + self.decoder_channels):
            raise ArchitectureError("channel counts must be >= 1")
        if len(self.input_leads) != self.input_channels:
            raise ArchitectureError("input_leads must name one lead per input channel")
        if self.normalization not in NORMALIZATIONS:
            raise ArchitectureError(f"normalization must be one of {NORMALIZATIONS}")

    @classmethod
    def desk(cls, **overrides) -> "AutoencoderConfig":
        """Small configuration for CI and desk-scale experiments."""
        base = dict(encoder_channels=(8, 16, 32), decoder_channels=(32, 16, 8), kernel_size=8)
        base.update(overrides)
        return cls(**base)

    def layer_shapes(self) -> list[tuple[int, int, int, bool]]:
        """``(in_channels, out_channels, kernel_size, rectified)`` per layer."""
        shapes = []
        c_in = self.input_channels
        for c_out in self.encoder_channels + self.decoder_channels:
            shapes.append((c_in, c_out, self.kernel_size, True))
            c_in = c_out
        shapes.append((c_in, self.input_channels, self.output_kernel_size, False))
        return shapes

    @property
    def receptive_field(self) -> int:
        return 1 + sum(k - 1 for _, _, k, _ in self.layer_shapes())

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AutoencoderConfig":
        return cls(**d)


@dataclass(eq=False)
class ModelWeights:
    kernels: list[np.ndarray] = field(default_factory=list)
    biases: list[np.ndarray] = field(default_factory=list)

    def arrays(self) -> list[np.ndarray]:
        """Tensors in checkpoint order: kernel 0, bias 0, kernel 1, ..."""
        out = []
        for k, b in zip(self.kernels, self.biases):
            out.extend((k, b))
        return out

    def copy(self) -> "ModelWeights":
        return ModelWeights([k.copy() for k in self.kernels], [b.copy() for b in self.biases])

    def equals(self, other: "ModelWeights") -> bool:
        a, b = self.arrays(), other.arrays()
        return len(a) == len(b) and all(
            x.shape == y.shape and np.array_equal(x, y) for x, y in zip(a, b))

    def n_parameters(self) -> int:
        return sum(a.size for a in self.arrays())

    def check(self, config: AutoencoderConfig) -> None:
        shapes = config.layer_shapes()
        if len(self.kernels) != len(shapes) or len(self.biases) != len(shapes):
            raise ArchitectureError(
                f"architecture mismatch: {len(self.kernels)} layers, config has {len(shapes)}")
        for i, (c_in, c_out, k, _) in enumerate(shapes):
            if self.kernels[i].shape != (c_out, c_in, k) or self.biases[i].shape != (c_out,):
                raise ArchitectureError(
                    f"architecture mismatch at layer {i}: kernel {self.kernels[i].shape}, "
                    f"expected {(c_out, c_in, k)}")
        if not all(np.all(np.isfinite(a)) for a in self.arrays()):
            raise NumericalError("non-finite weights")


def init_weights(config: AutoencoderConfig, seed: int = 0) -> ModelWeights:
    """Fan-in scaled uniform kernels (He bound for rectified layers, LeCun bound
    for the linear projection) and zero biases."""
    rng = np.random.default_rng(seed)
    weights = ModelWeights()
    for c_in, c_out, k, rectified in config.layer_shapes():
        fan_in = c_in * k
        bound = np.sqrt((6.0 if rectified else 3.0) / fan_in)
        weights.kernels.append(rng.uniform(-bound, bound, size=(c_out, c_in, k)))
        weights.biases.append(np.zeros(c_out))
    return weights


def zero_weights(config: AutoencoderConfig) -> ModelWeights:
    return ModelWeights(
        [np.zeros((o, i, k)) for i, o, k, _ in config.layer_shapes()],
        [np.zeros(o) for _, o, _, _ in config.layer_shapes()],
    )


def _as_batch(x, config: AutoencoderConfig) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3 or x.shape[1] != config.input_channels:
        raise ArchitectureError(
            f"expected input of shape ({config.input_channels}, N) or (B, "
            f"{config.input_channels}, N), got {x.shape}")
    if x.shape[2] < config.kernel_size:
        raise ArchitectureError(f"input length {x.shape[2]} shorter than kernel {config.kernel_size}")
    if not np.all(np.isfinite(x)):
        raise NumericalError("non-finite input")
    return np.ascontiguousarray(x), single


def _run(weights: ModelWeights, config: AutoencoderConfig, x: np.ndarray):
    """Forward pass keeping each layer's input and pre-activation for backprop."""
    inputs, preacts = [], []
    a = x
    # overflow shows up as non-finite values, which callers check and report
    with np.errstate(over="ignore", invalid="ignore"):
        for (c_in, c_out, k, rectified), w, b in zip(config.layer_shapes(), weights.kernels,
                                                     weights.biases):
            inputs.append(a)
            z = kernels.conv1d_forward(a, np.ascontiguousarray(w), np.ascontiguousarray(b),
                                       (k - 1) // 2)
            preacts.append(z)
            a = np.maximum(z, 0.0) if rectified else z
    return a, inputs, preacts


def forward(weights: ModelWeights, config: AutoencoderConfig, x) -> np.ndarray:
    """Apply the network to ``(C, N)`` or ``(B, C, N)`` input; same shape out."""
    weights.check(config)
    xb, single = _as_batch(x, config)
    y, _, _ = _run(weights, config, xb)
    if not np.all(np.isfinite(y)):
        raise NumericalError("non-finite output in forward pass")
    return y[0] if single else y


def mse_loss(prediction, target) -> float:
    p = np.asarray(prediction, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {t.shape}")
    return float(np.mean((p - t) ** 2))


def compute_gradients(weights: ModelWeights, config: AutoencoderConfig, inputs, targets):
    """Loss and exact gradients of the mean-squared error over the batch.

    Returns ``(loss, grads)`` where ``grads`` is a :class:`ModelWeights` with the
    same shapes as ``weights``.
    """
    weights.check(config)
    xb, _ = _as_batch(inputs, config)
    tb = np.asarray(targets, dtype=np.float64)
    if tb.ndim == 2:
        tb = tb[None]
    if tb.shape != xb.shape:
        raise ValueError(f"targets {tb.shape} do not match inputs {xb.shape}")
    y, acts, preacts = _run(weights, config, xb)
    loss = float(np.mean((y - tb) ** 2))
    if not np.isfinite(loss):
        raise NumericalError("non-finite loss in forward pass")

    shapes = config.layer_shapes()
    grads = ModelWeights([None] * len(shapes), [None] * len(shapes))
    delta = 2.0 * (y - tb) / y.size
    for i in range(len(shapes) - 1, -1, -1):
        _, _, k, rectified = shapes[i]
        if rectified:
            delta = delta * (preacts[i] > 0)
        delta = np.ascontiguousarray(delta)
        dw, db = kernels.conv1d_backward_weight(delta, acts[i], k, (k - 1) // 2)
        grads.kernels[i] = np.asarray(dw)
        grads.biases[i] = np.asarray(db)
        if i > 0:
            delta = kernels.conv1d_backward_input(
                delta, np.ascontiguousarray(weights.kernels[i]), (k - 1) // 2)
    if not all(np.all(np.isfinite(g)) for g in grads.arrays()):
        raise NumericalError("non-finite gradient")
    return loss, grads
