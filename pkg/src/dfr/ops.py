"""Dense-tensor operations for the VGG19 feature stack and its image gradient.

Tensors are plain float32 ndarrays in row-major (n, c, h, w) order with
n == 1 throughout the pipeline. Only the fixed cases the network needs are
implemented: 3x3 / stride-1 / pad-1 convolution and 2x2 / stride-2 pooling.
Weight gradients never exist here; the only reverse-mode path is
d(loss)/d(input), which is all that pixel optimization requires.
"""

from typing import NamedTuple

import numpy as np

from . import backend
from .errors import ConfigurationError


class PoolIndices(NamedTuple):
    """Argmax bookkeeping from a 2x2 max-pool forward pass.

    ``shape`` is the pool output shape; ``argmax`` holds, per output cell,
    the flat index into the input tensor that supplied the maximum.
    """

    shape: tuple[int, int, int, int]
    argmax: np.ndarray

    @property
    def input_shape(self) -> tuple[int, int, int, int]:
        n, c, h, w = self.shape
        return (n, c, h * 2, w * 2)


def _as_tensor4(x, name: str) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 4:
        raise ConfigurationError(f"{name} must be 4-d (n, c, h, w), got shape {x.shape}")
    if any(d < 1 for d in x.shape):
        raise ConfigurationError(f"{name} has an empty dimension: {x.shape}")
    return np.ascontiguousarray(x)


def conv2d_forward(inp, kernel, bias) -> np.ndarray:
    """3x3 stride-1 convolution with 1-pixel zero padding (same spatial size)."""
    inp = _as_tensor4(inp, "input")
    kernel = _as_tensor4(kernel, "kernel")
    bias = np.ascontiguousarray(bias)
    if kernel.shape[2:] != (3, 3):
        raise ConfigurationError(f"kernel must be (out_c, in_c, 3, 3), got {kernel.shape}")
    if kernel.shape[1] != inp.shape[1]:
        raise ConfigurationError(
            f"kernel expects {kernel.shape[1]} input channels, input has shape {inp.shape}"
        )
    if bias.shape != (kernel.shape[0],):
        raise ConfigurationError(
            f"bias shape {bias.shape} does not match kernel out channels {kernel.shape[0]}"
        )
    return backend.kernels().conv2d_forward(inp, kernel, bias.astype(inp.dtype, copy=False))


def flip_kernel(kernel) -> np.ndarray:
    """Swap in/out channel axes and reverse both spatial axes.

    Convolving an output gradient with this yields the input gradient of
    the original convolution.
    """
    kernel = _as_tensor4(kernel, "kernel")
    return np.ascontiguousarray(kernel[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))


def conv2d_input_grad(output_grad, kernel, flipped=None) -> np.ndarray:
    """d(loss)/d(input) of conv2d_forward given d(loss)/d(output).

    ``flipped`` may pass a precomputed :func:`flip_kernel` result, which the
    feature extractor does once per weight set.
    """
    output_grad = _as_tensor4(output_grad, "output_grad")
    kernel = _as_tensor4(kernel, "kernel")
    if output_grad.shape[1] != kernel.shape[0]:
        raise ConfigurationError(
            f"output_grad channels {output_grad.shape[1]} do not match "
            f"kernel out channels {kernel.shape[0]}"
        )
    if flipped is None:
        flipped = flip_kernel(kernel)
    zero_bias = np.zeros(flipped.shape[0], dtype=output_grad.dtype)
    return backend.kernels().conv2d_forward(output_grad, flipped, zero_bias)


def relu_forward(inp) -> np.ndarray:
    inp = _as_tensor4(inp, "input")
    return np.maximum(inp, inp.dtype.type(0))


def relu_backward(output_grad, forward_input) -> np.ndarray:
    """Pass gradient where the forward input was > 0; subgradient at 0 is 0."""
    output_grad = _as_tensor4(output_grad, "output_grad")
    forward_input = _as_tensor4(forward_input, "forward_input")
    if output_grad.shape != forward_input.shape:
        raise ConfigurationError(
            f"grad shape {output_grad.shape} != forward input shape {forward_input.shape}"
        )
    return np.where(forward_input > 0, output_grad, output_grad.dtype.type(0))


def maxpool2x2_forward(inp) -> tuple[np.ndarray, PoolIndices]:
    inp = _as_tensor4(inp, "input")
    n, c, h, w = inp.shape
    if h % 2 or w % 2:
        raise ConfigurationError(f"max-pool needs even spatial dims, got {inp.shape}")
    out, argmax = backend.kernels().maxpool2x2_forward(inp)
    return out, PoolIndices(out.shape, argmax)


def maxpool2x2_backward(output_grad, indices: PoolIndices) -> np.ndarray:
    output_grad = _as_tensor4(output_grad, "output_grad")
    if output_grad.shape != indices.shape:
        raise ConfigurationError(
            f"grad shape {output_grad.shape} != pool output shape {indices.shape}"
        )
    n, c, h, w = indices.input_shape
    oy = (indices.argmax // w) % h
    ox = indices.argmax % w
    wy = np.arange(h // 2)[:, None] * 2
    wx = np.arange(w // 2)[None, :] * 2
    if ((oy - wy < 0) | (oy - wy > 1) | (ox - wx < 0) | (ox - wx > 1)).any():
        raise RuntimeError("pool argmax index outside its 2x2 window")
    return backend.kernels().maxpool2x2_backward(
        output_grad, indices.argmax, indices.input_shape
    )


def avgpool2x2_forward(inp) -> np.ndarray:
    inp = _as_tensor4(inp, "input")
    if inp.shape[2] % 2 or inp.shape[3] % 2:
        raise ConfigurationError(f"avg-pool needs even spatial dims, got {inp.shape}")
    return backend.kernels().avgpool2x2_forward(inp)


def avgpool2x2_backward(output_grad, input_shape) -> np.ndarray:
    output_grad = _as_tensor4(output_grad, "output_grad")
    expected = (input_shape[0], input_shape[1], input_shape[2] // 2, input_shape[3] // 2)
    if output_grad.shape != expected:
        raise ConfigurationError(
            f"grad shape {output_grad.shape} inconsistent with input shape {input_shape}"
        )
    return backend.kernels().avgpool2x2_backward(output_grad, tuple(input_shape))


def axpy_blend(a, b, lam: float) -> np.ndarray:
    """Elementwise (1 - lam) * a + lam * b with bitwise-exact endpoints."""
    a = _as_tensor4(a, "a")
    b = _as_tensor4(b, "b")
    if a.shape != b.shape:
        raise ConfigurationError(f"blend operands differ in shape: {a.shape} vs {b.shape}")
    if not 0.0 <= lam <= 1.0:
        raise ConfigurationError(f"rotation weight must be in [0, 1], got {lam}")
    if lam == 0.0:
        return a.copy()
    if lam == 1.0:
        return b.copy()
    lam = a.dtype.type(lam)
    return (a.dtype.type(1) - lam) * a + lam * b


def resize_bilinear_spatial(inp, new_h: int, new_w: int) -> np.ndarray:
    """Channelwise bilinear resample over (h, w) with corner-aligned sampling."""
    inp = _as_tensor4(inp, "input")
    if new_h < 1 or new_w < 1:
        raise ConfigurationError(f"target size must be >= 1, got {new_h}x{new_w}")
    n, c, h, w = inp.shape
    ys = np.linspace(0.0, h - 1.0, new_h) if new_h > 1 else np.zeros(1)
    xs = np.linspace(0.0, w - 1.0, new_w) if new_w > 1 else np.zeros(1)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0).astype(inp.dtype)[:, None]
    fx = (xs - x0).astype(inp.dtype)[None, :]
    one = inp.dtype.type(1)
    v00 = inp[:, :, y0[:, None], x0[None, :]]
    v01 = inp[:, :, y0[:, None], x1[None, :]]
    v10 = inp[:, :, y1[:, None], x0[None, :]]
    v11 = inp[:, :, y1[:, None], x1[None, :]]
    top = v00 * (one - fx) + v01 * fx
    bot = v10 * (one - fx) + v11 * fx
    return top * (one - fy) + bot * fy
