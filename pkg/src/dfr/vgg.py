"""VGG19 feature stack: weight loading, forward extraction, image gradient.

The network is the torchvision-convention VGG19 feature trunk truncated
after conv5_1 (13 conv layers in blocks of 2, 2, 4, 4, 1 with 2x2 pooling
between blocks). Weights are frozen; the only gradient ever computed is
d(loss)/d(image), accumulated from per-layer feature gradients through the
shared trunk. Features are captured post-ReLU.
"""

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import ops
from .dfrw import read_dfrw
from .errors import ConfigurationError, LoadError

# layer -> (out_channels, in_channels)
CONV_CHANNELS: dict[str, tuple[int, int]] = {
    "conv1_1": (64, 3),
    "conv1_2": (64, 64),
    "conv2_1": (128, 64),
    "conv2_2": (128, 128),
    "conv3_1": (256, 128),
    "conv3_2": (256, 256),
    "conv3_3": (256, 256),
    "conv3_4": (256, 256),
    "conv4_1": (512, 256),
    "conv4_2": (512, 512),
    "conv4_3": (512, 512),
    "conv4_4": (512, 512),
    "conv5_1": (512, 512),
}

CONV_LAYERS: tuple[str, ...] = tuple(CONV_CHANNELS)

# forward order; "pool" entries sit between blocks
STACK: tuple[str, ...] = (
    "conv1_1", "conv1_2", "pool",
    "conv2_1", "conv2_2", "pool",
    "conv3_1", "conv3_2", "conv3_3", "conv3_4", "pool",
    "conv4_1", "conv4_2", "conv4_3", "conv4_4", "pool",
    "conv5_1",
)

POOLING_MODES = ("max", "avg")


def layer_block(name: str) -> int:
    """Block number of a conv layer (spatial dims are halved per prior block)."""
    return int(name[4])


def kernel_shape(name: str) -> tuple[int, int, int, int]:
    out_c, in_c = CONV_CHANNELS[name]
    return (out_c, in_c, 3, 3)


@dataclass(frozen=True)
class VggWeights:
    """Frozen convolution kernels/biases plus the preprocessing constants.

    Arrays are made read-only on construction; spatially-flipped kernels for
    the input-gradient pass are precomputed once so every backward step can
    share them.
    """

    kernels: dict[str, np.ndarray]
    biases: dict[str, np.ndarray]
    mean: np.ndarray
    std: np.ndarray
    flipped: dict[str, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        missing = set(CONV_LAYERS) - set(self.kernels)
        if missing:
            raise LoadError(f"missing conv layers: {sorted(missing)}")
        extra = set(self.kernels) - set(CONV_LAYERS)
        if extra:
            raise LoadError(f"unexpected layers: {sorted(extra)}")
        kernels, biases, flipped = {}, {}, {}
        for name in CONV_LAYERS:
            # copy so freezing never propagates to caller-owned arrays
            k = np.array(self.kernels[name], dtype=np.float32, order="C")
            if k.shape != kernel_shape(name):
                raise LoadError(
                    f"{name}: kernel shape {k.shape}, expected {kernel_shape(name)}"
                )
            if name not in self.biases:
                raise LoadError(f"{name}: bias missing")
            b = np.array(self.biases[name], dtype=np.float32, order="C")
            if b.shape != (k.shape[0],):
                raise LoadError(f"{name}: bias shape {b.shape}, expected ({k.shape[0]},)")
            if not (np.isfinite(k).all() and np.isfinite(b).all()):
                raise LoadError(f"{name}: non-finite weight values")
            f = ops.flip_kernel(k)
            for arr in (k, b, f):
                arr.flags.writeable = False
            kernels[name], biases[name], flipped[name] = k, b, f
        mean = np.array(self.mean, dtype=np.float32)
        std = np.array(self.std, dtype=np.float32)
        if mean.shape != (3,) or std.shape != (3,):
            raise LoadError("preprocess mean/std must each hold 3 values")
        if (std <= 0).any():
            raise LoadError("preprocess std must be positive")
        mean.flags.writeable = False
        std.flags.writeable = False
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "biases", biases)
        object.__setattr__(self, "flipped", flipped)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


def load_weights(path) -> VggWeights:
    """Read a DFRW file and validate it against the canonical architecture."""
    manifest, tensors = read_dfrw(path)
    for key in ("layers", "mean", "std"):
        if key not in manifest:
            raise LoadError(f"manifest lacks {key!r}")
    order = list(manifest["layers"])
    missing = sorted(set(CONV_LAYERS) - set(order))
    extra = sorted(set(order) - set(CONV_LAYERS))
    if missing or extra or len(order) != len(CONV_LAYERS):
        raise LoadError(
            f"manifest layers do not match the canonical 13 conv layers"
            f"{': missing ' + ', '.join(missing) if missing else ''}"
            f"{'; unexpected ' + ', '.join(extra) if extra else ''}"
        )
    if len(tensors) != 2 * len(order):
        raise LoadError(
            f"expected {2 * len(order)} tensor records (kernel+bias per layer), "
            f"found {len(tensors)}"
        )
    kernels: dict[str, np.ndarray] = {}
    biases: dict[str, np.ndarray] = {}
    for i, layer in enumerate(order):
        kname, kdata = tensors[2 * i]
        bname, bdata = tensors[2 * i + 1]
        if kname != layer or bname != layer:
            raise LoadError(
                f"tensor records {kname!r}/{bname!r} out of order, expected {layer!r}"
            )
        if kdata.ndim != 4:
            raise LoadError(f"{layer}: kernel record has ndim {kdata.ndim}, expected 4")
        if bdata.ndim != 1:
            raise LoadError(f"{layer}: bias record has ndim {bdata.ndim}, expected 1")
        kernels[layer] = kdata
        biases[layer] = bdata
    return VggWeights(
        kernels=kernels,
        biases=biases,
        mean=np.asarray(manifest["mean"], dtype=np.float32),
        std=np.asarray(manifest["std"], dtype=np.float32),
    )


@dataclass(frozen=True)
class LayerSelection:
    """Which layers feed the content loss and the style loss."""

    content_layer: str = "conv4_2"
    style_layers: tuple[str, ...] = (
        "conv1_1", "conv2_1", "conv3_1", "conv4_1", "conv5_1",
    )
    style_layer_weights: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.content_layer not in CONV_CHANNELS:
            raise ConfigurationError(f"unknown content layer {self.content_layer!r}")
        if not self.style_layers:
            raise ConfigurationError("at least one style layer is required")
        for name in self.style_layers:
            if name not in CONV_CHANNELS:
                raise ConfigurationError(f"unknown style layer {name!r}")
        if len(self.style_layer_weights) != len(self.style_layers):
            raise ConfigurationError(
                f"{len(self.style_layer_weights)} style weights for "
                f"{len(self.style_layers)} style layers"
            )
        if any(w < 0 for w in self.style_layer_weights):
            raise ConfigurationError("style layer weights must be >= 0")

    def all_layers(self) -> tuple[str, ...]:
        seen = dict.fromkeys((self.content_layer, *self.style_layers))
        return tuple(seen)


@dataclass
class Tape:
    """Recorded forward pass: everything backward_to_image needs."""

    steps: list
    input_shape: tuple[int, int, int, int]
    weights: VggWeights


@dataclass
class FeatureSet:
    """Post-ReLU activations keyed by layer name, plus the backward tape.

    Derived feature sets (blended targets) carry ``tape=None``.
    """

    features: dict[str, np.ndarray]
    tape: Tape | None = None


def preprocess(image: np.ndarray, weights: VggWeights) -> np.ndarray:
    """8-bit HxWx3 image -> normalized float32 (1, 3, H, W) tensor."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ConfigurationError(f"expected an HxWx3 image, got shape {image.shape}")
    x = image.astype(np.float32) / np.float32(255.0)
    x = (x - weights.mean) / weights.std
    return np.ascontiguousarray(x.transpose(2, 0, 1))[None]


def postprocess(tensor: np.ndarray, weights: VggWeights) -> np.ndarray:
    """Inverse of :func:`preprocess` with clamping to the 8-bit range."""
    x = np.asarray(tensor)
    if x.ndim != 4 or x.shape[0] != 1 or x.shape[1] != 3:
        raise ConfigurationError(f"expected a (1, 3, H, W) tensor, got shape {x.shape}")
    x = x[0].transpose(1, 2, 0) * weights.std + weights.mean
    x = np.clip(x, 0.0, 1.0) * np.float32(255.0)
    return np.rint(x).astype(np.uint8)


def _resolve_layers(layers) -> tuple[str, ...]:
    if isinstance(layers, LayerSelection):
        return layers.all_layers()
    resolved = tuple(layers)
    if not resolved:
        raise ConfigurationError("no layers requested")
    for name in resolved:
        if name not in CONV_CHANNELS:
            raise ConfigurationError(f"unknown layer {name!r}")
    return resolved


def extract_features(
    image_tensor: np.ndarray,
    weights: VggWeights,
    layers: Sequence[str] | LayerSelection,
    pooling: str = "max",
) -> FeatureSet:
    """Run the trunk, capturing post-ReLU features at the requested layers.

    The pass stops at the deepest requested layer; the returned tape holds
    the activations and pool indices backward_to_image replays.
    """
    wanted = set(_resolve_layers(layers))
    if pooling not in POOLING_MODES:
        raise ConfigurationError(f"pooling must be one of {POOLING_MODES}, got {pooling!r}")
    x = np.asarray(image_tensor)
    if x.ndim != 4 or x.shape[1] != 3:
        raise ConfigurationError(f"expected a (1, 3, H, W) tensor, got shape {x.shape}")
    if x.shape[2] % 16 or x.shape[3] % 16:
        raise ConfigurationError(
            f"spatial dims must be divisible by 16 (four 2x2 pools), got {x.shape[2:]}"
        )
    # float64 passes through untouched so finite-difference oracles can run
    # the stack at full precision; the pipeline itself is float32
    dtype = np.float64 if x.dtype == np.float64 else np.float32
    x = np.ascontiguousarray(x, dtype=dtype)
    input_shape = x.shape

    features: dict[str, np.ndarray] = {}
    steps: list = []
    for entry in STACK:
        if entry == "pool":
            if pooling == "max":
                x, indices = ops.maxpool2x2_forward(x)
                steps.append(("maxpool", indices))
            else:
                steps.append(("avgpool", x.shape))
                x = ops.avgpool2x2_forward(x)
            continue
        pre = ops.conv2d_forward(x, weights.kernels[entry], weights.biases[entry])
        x = ops.relu_forward(pre)
        del pre
        steps.append(("conv", entry))
        # relu output shares its >0 mask with the relu input, so taping the
        # activation is enough for the backward pass
        steps.append(("relu", x))
        if entry in wanted:
            features[entry] = x
            steps.append(("capture", entry, x.shape))
            if len(features) == len(wanted):
                break
    return FeatureSet(features, Tape(steps, input_shape, weights))


def backward_to_image(
    feature_grads: Mapping[str, np.ndarray] | FeatureSet, tape: Tape
) -> np.ndarray:
    """Accumulate per-layer feature gradients into d(loss)/d(image)."""
    if isinstance(feature_grads, FeatureSet):
        feature_grads = feature_grads.features
    captured = {s[1]: s[2] for s in tape.steps if s[0] == "capture"}
    unknown = set(feature_grads) - set(captured)
    if unknown:
        raise ConfigurationError(f"gradients for untaped layers: {sorted(unknown)}")
    for name, g in feature_grads.items():
        if np.asarray(g).shape != captured[name]:
            raise ConfigurationError(
                f"{name}: gradient shape {np.asarray(g).shape} != "
                f"feature shape {captured[name]}"
            )
    g: np.ndarray | None = None
    for step in reversed(tape.steps):
        kind = step[0]
        if kind == "capture":
            name = step[1]
            if name in feature_grads:
                inj = np.ascontiguousarray(feature_grads[name], dtype=np.float32)
                g = inj.copy() if g is None else g + inj
        elif g is None:
            continue
        elif kind == "relu":
            g = ops.relu_backward(g, step[1])
        elif kind == "conv":
            name = step[1]
            g = ops.conv2d_input_grad(
                g, tape.weights.kernels[name], flipped=tape.weights.flipped[name]
            )
        elif kind == "maxpool":
            g = ops.maxpool2x2_backward(g, step[1])
        elif kind == "avgpool":
            g = ops.avgpool2x2_backward(g, step[1])
    if g is None:
        return np.zeros(tape.input_shape, dtype=np.float32)
    return g
