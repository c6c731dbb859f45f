"""Gram matrix, content loss, style loss, and the combined objective.

The Gram matrix is unnormalized (F F^T over channel-major reshaped
features); the 1/(4 D^2 M^2) factor lives inside the style loss so the
loss values stay on the scale the content/style weight defaults assume.
Gradients are analytic: content is f - target, style collapses the two
chain-rule terms of G = F F^T through the symmetry of (G - target_G).
"""

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError
from .vgg import FeatureSet, LayerSelection


@dataclass(frozen=True)
class LossWeights:
    """Content weight alpha and style weight beta."""

    alpha: float = 1e4
    beta: float = 0.01

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ConfigurationError(
                f"loss weights must be >= 0, got alpha={self.alpha} beta={self.beta}"
            )


@dataclass
class LossReport:
    total: float
    content: float
    style: float
    per_style_layer: list[float]


def _features(obj) -> Mapping[str, np.ndarray]:
    return obj.features if isinstance(obj, FeatureSet) else obj


def gram(f: np.ndarray) -> np.ndarray:
    """Channel-correlation matrix F F^T of a (1, c, h, w) feature map.

    Accumulates in float64 so the result depends only on the multiset of
    spatial values, then mirrors the upper triangle for exact symmetry.
    float32 features give a float32 gram; float64 stays float64 so
    finite-difference oracles are not quantized by the cast.
    """
    f = np.asarray(f)
    if f.ndim != 4 or f.shape[0] != 1:
        raise ConfigurationError(f"expected a (1, c, h, w) tensor, got shape {f.shape}")
    c = f.shape[1]
    mat = f.reshape(c, -1).astype(np.float64)
    g = mat @ mat.T
    g = np.triu(g) + np.triu(g, 1).T
    return g.astype(np.float64 if f.dtype == np.float64 else np.float32)


def content_loss(f: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Half squared distance between feature maps; gradient is f - target."""
    f = np.asarray(f)
    target = np.asarray(target)
    if f.shape != target.shape:
        raise ConfigurationError(
            f"content feature shape {f.shape} != target shape {target.shape}"
        )
    diff = f - target
    d = diff.ravel().astype(np.float64)
    return 0.5 * float(d @ d), diff


def style_loss(
    feats: Mapping[str, np.ndarray] | FeatureSet,
    target_grams: Mapping[str, np.ndarray],
    selection: LayerSelection,
) -> tuple[float, dict[str, np.ndarray], list[float]]:
    """Weighted Gram mismatch over the style layers.

    Returns (loss, per-layer feature gradients, per-layer loss terms).
    Layer l contributes w_l / (4 D_l^2 M_l^2) * ||G_l - target_l||_F^2 with
    gradient w_l / (D_l^2 M_l^2) * (G_l - target_l) @ F_l.
    """
    feats = _features(feats)
    total = 0.0
    grads: dict[str, np.ndarray] = {}
    per_layer: list[float] = []
    for name, w in zip(selection.style_layers, selection.style_layer_weights):
        if name not in feats:
            raise ConfigurationError(f"style layer {name!r} missing from features")
        if name not in target_grams:
            raise ConfigurationError(f"style layer {name!r} missing from target grams")
        f = np.asarray(feats[name])
        d = f.shape[1]
        m = f.shape[2] * f.shape[3]
        g = gram(f)
        tg = np.asarray(target_grams[name])
        if tg.shape != (d, d):
            raise ConfigurationError(
                f"{name}: target gram shape {tg.shape}, expected {(d, d)}"
            )
        diff = g - tg
        norm = float(diff.ravel().astype(np.float64) @ diff.ravel().astype(np.float64))
        denom = float(d) * float(d) * float(m) * float(m)
        term = w * norm / (4.0 * denom)
        per_layer.append(term)
        total += term
        coeff = np.float32(w / denom)
        grads[name] = (coeff * (diff @ f.reshape(d, m))).reshape(f.shape)
    return total, grads, per_layer


def total_loss(
    feats: Mapping[str, np.ndarray] | FeatureSet,
    content_target: Mapping[str, np.ndarray] | FeatureSet,
    style_target_grams: Mapping[str, np.ndarray],
    weights: LossWeights,
    selection: LayerSelection,
) -> tuple[LossReport, dict[str, np.ndarray]]:
    """Combined objective alpha * content + beta * style and its feature grads.

    A layer serving both roles accumulates both gradient contributions.
    """
    feats = _features(feats)
    content_target = _features(content_target)
    cl = selection.content_layer
    if cl not in feats:
        raise ConfigurationError(f"content layer {cl!r} missing from features")
    if cl not in content_target:
        raise ConfigurationError(f"content layer {cl!r} missing from content target")
    c_value, c_grad = content_loss(feats[cl], content_target[cl])
    s_value, s_grads, per_layer = style_loss(feats, style_target_grams, selection)
    grads = {name: np.float32(weights.beta) * g for name, g in s_grads.items()}
    weighted_c = np.float32(weights.alpha) * c_grad
    grads[cl] = grads[cl] + weighted_c if cl in grads else weighted_c
    report = LossReport(
        total=weights.alpha * c_value + weights.beta * s_value,
        content=c_value,
        style=s_value,
        per_style_layer=per_layer,
    )
    return report, grads
