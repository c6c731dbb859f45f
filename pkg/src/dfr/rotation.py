"""Rotated-and-blended feature targets for multimodal stylization.

Target feature maps are rotated counter-clockwise in the spatial plane by
0/90/180/270 degrees and mixed back into the originals with a rotation
weight in [0, 1]. 90/270 rotations of non-square maps change shape, so the
rotated map is bilinearly resized back before blending; targets are built
once per job and stay constant during optimization.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .ops import axpy_blend, resize_bilinear_spatial
from .vgg import FeatureSet

ANGLES = (0, 90, 180, 270)
APPLY_MODES = ("both", "style_only", "content_only")


@dataclass(frozen=True)
class RotationConfig:
    """One cell of the multimodal grid: angle, rotation weight, target side."""

    angle: int = 0
    lam: float = 1.0
    apply_to: str = "both"

    def __post_init__(self):
        if self.angle not in ANGLES:
            raise ConfigurationError(f"angle must be one of {ANGLES}, got {self.angle}")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigurationError(f"rotation weight must be in [0, 1], got {self.lam}")
        if self.apply_to not in APPLY_MODES:
            raise ConfigurationError(
                f"apply_to must be one of {APPLY_MODES}, got {self.apply_to!r}"
            )


def rotate_feature(w: np.ndarray, angle: int) -> np.ndarray:
    """Rotate each channel's h x w plane counter-clockwise by the given angle.

    90/270 swap the spatial dims; batch and channel axes are untouched.
    """
    if angle not in ANGLES:
        raise ConfigurationError(f"angle must be one of {ANGLES}, got {angle}")
    w = np.asarray(w)
    if w.ndim != 4:
        raise ConfigurationError(f"expected a 4-d tensor, got shape {w.shape}")
    if angle == 0:
        return w
    return np.ascontiguousarray(np.rot90(w, k=angle // 90, axes=(2, 3)))


def make_target(w: np.ndarray, config: RotationConfig) -> np.ndarray:
    """Blend a feature map with its rotation: (1 - lam) * w + lam * rotated."""
    w = np.asarray(w)
    # both endpoints of the blend and the identity angle are exact
    if config.lam == 0.0 or config.angle == 0:
        return w.copy()
    wr = rotate_feature(w, config.angle)
    if wr.shape != w.shape:
        wr = resize_bilinear_spatial(wr, w.shape[2], w.shape[3])
    return axpy_blend(w, wr, config.lam)


def _transform(feats: FeatureSet, config: RotationConfig) -> FeatureSet:
    return FeatureSet({name: make_target(f, config) for name, f in feats.features.items()})


def build_loss_targets(
    content_feats: FeatureSet, style_feats: FeatureSet, config: RotationConfig
) -> tuple[FeatureSet, FeatureSet]:
    """Apply the rotation blend to the content and/or style feature sets.

    Sets the config leaves untouched pass through unchanged.
    """
    if not content_feats.features or not style_feats.features:
        raise ConfigurationError("feature sets must be non-empty")
    for name in set(content_feats.features) & set(style_feats.features):
        a = content_feats.features[name].shape
        b = style_feats.features[name].shape
        if a[1] != b[1]:
            raise ConfigurationError(
                f"layer {name!r} disagrees between sets: {a} vs {b}"
            )
    content_target = (
        _transform(content_feats, config)
        if config.apply_to in ("both", "content_only")
        else content_feats
    )
    style_target = (
        _transform(style_feats, config)
        if config.apply_to in ("both", "style_only")
        else style_feats
    )
    return content_target, style_target
