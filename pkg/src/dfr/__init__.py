"""Multimodal neural style transfer by rotating VGG19 feature-map targets.

A content image is re-rendered in the style of a reference image by
gradient descent on pixels. Loss targets are built from feature maps
rotated by 0/90/180/270 degrees and blended with the originals by a
rotation weight, so one image pair yields a whole grid of stylizations.
"""

from . import backend
from .adam import AdamState, adam_init, adam_step
from .errors import ConfigurationError, LoadError, NumericFailure
from .losses import LossReport, LossWeights, content_loss, gram, style_loss, total_loss
from .ops import (
    PoolIndices,
    avgpool2x2_backward,
    avgpool2x2_forward,
    axpy_blend,
    conv2d_forward,
    conv2d_input_grad,
    maxpool2x2_backward,
    maxpool2x2_forward,
    relu_backward,
    relu_forward,
    resize_bilinear_spatial,
)
from .pipeline import JobResult, StylizationJob, load_and_resize, run_grid, run_job
from .rotation import RotationConfig, build_loss_targets, make_target, rotate_feature
from .vgg import (
    CONV_LAYERS,
    FeatureSet,
    LayerSelection,
    VggWeights,
    backward_to_image,
    extract_features,
    load_weights,
    postprocess,
    preprocess,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ConfigurationError",
    "CONV_LAYERS",
    "FeatureSet",
    "JobResult",
    "LayerSelection",
    "LoadError",
    "LossReport",
    "LossWeights",
    "NumericFailure",
    "PoolIndices",
    "RotationConfig",
    "StylizationJob",
    "VggWeights",
    "adam_init",
    "adam_step",
    "avgpool2x2_backward",
    "avgpool2x2_forward",
    "axpy_blend",
    "backend",
    "backward_to_image",
    "build_loss_targets",
    "content_loss",
    "conv2d_forward",
    "conv2d_input_grad",
    "extract_features",
    "gram",
    "load_and_resize",
    "load_weights",
    "make_target",
    "maxpool2x2_backward",
    "maxpool2x2_forward",
    "postprocess",
    "preprocess",
    "relu_backward",
    "relu_forward",
    "resize_bilinear_spatial",
    "rotate_feature",
    "run_grid",
    "run_job",
    "style_loss",
    "total_loss",
]
