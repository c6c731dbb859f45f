"""Pure-numpy implementations of the hot kernels.

Shapes follow the (n, c, h, w) row-major convention used everywhere in this
package. These are the fallback twins of the numba kernels; both must agree
within float32 round-off, which the kernel tests check explicitly.
"""

import numpy as np


def conv2d_forward(inp, kernel, bias):
    # 3x3, stride 1, zero padding 1. Nine shifted (oc x c) @ (c x h*w)
    # matmuls instead of an im2col buffer: same flops, bounded memory.
    n, c, h, w = inp.shape
    oc = kernel.shape[0]
    pad = np.zeros((n, c, h + 2, w + 2), dtype=inp.dtype)
    pad[:, :, 1:-1, 1:-1] = inp
    out = np.empty((n, oc, h * w), dtype=inp.dtype)
    for b in range(n):
        acc = np.zeros((oc, h * w), dtype=inp.dtype)
        for ky in range(3):
            for kx in range(3):
                patch = np.ascontiguousarray(pad[b, :, ky : ky + h, kx : kx + w])
                acc += kernel[:, :, ky, kx] @ patch.reshape(c, h * w)
        out[b] = acc + bias[:, None]
    return out.reshape(n, oc, h, w)


def maxpool2x2_forward(inp):
    n, c, h, w = inp.shape
    oh, ow = h // 2, w // 2
    win = (
        inp.reshape(n, c, oh, 2, ow, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, oh, ow, 4)
    )
    # argmax scans the window row-major, so ties resolve to the first cell
    local = win.argmax(axis=-1)
    out = np.take_along_axis(win, local[..., None], axis=-1)[..., 0]
    iy = np.arange(oh)[:, None] * 2 + (local >> 1)
    ix = np.arange(ow)[None, :] * 2 + (local & 1)
    plane = np.arange(n)[:, None, None, None] * c + np.arange(c)[None, :, None, None]
    argmax = (plane * h + iy) * w + ix
    return np.ascontiguousarray(out), argmax.astype(np.int64)


def maxpool2x2_backward(output_grad, argmax, input_shape):
    # window argmax positions are unique, plain scatter is enough
    flat = np.zeros(int(np.prod(input_shape)), dtype=output_grad.dtype)
    flat[argmax.ravel()] = output_grad.ravel()
    return flat.reshape(input_shape)


def avgpool2x2_forward(inp):
    n, c, h, w = inp.shape
    return inp.reshape(n, c, h // 2, 2, w // 2, 2).mean(axis=(3, 5))


def avgpool2x2_backward(output_grad, input_shape):
    quarter = output_grad * output_grad.dtype.type(0.25)
    return np.repeat(np.repeat(quarter, 2, axis=2), 2, axis=3)
