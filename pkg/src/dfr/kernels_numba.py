"""Numba @njit twins of the hot kernels.

All kernels are serial (parallelism happens at the job level), release the
GIL so concurrent jobs overlap, and cache their compilation on disk. Inputs
must be C-contiguous; the dispatch layer in ops.py guarantees that.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def conv2d_forward(inp, kernel, bias):
    n, c, h, w = inp.shape
    oc = kernel.shape[0]
    pad = np.zeros((n, c, h + 2, w + 2), dtype=inp.dtype)
    for b in range(n):
        for ic in range(c):
            for y in range(h):
                for x in range(w):
                    pad[b, ic, y + 1, x + 1] = inp[b, ic, y, x]
    out = np.empty((n, oc, h, w), dtype=inp.dtype)
    for b in range(n):
        for o in range(oc):
            bv = bias[o]
            for y in range(h):
                for x in range(w):
                    out[b, o, y, x] = bv
        for o in range(oc):
            for ic in range(c):
                w00 = kernel[o, ic, 0, 0]
                w01 = kernel[o, ic, 0, 1]
                w02 = kernel[o, ic, 0, 2]
                w10 = kernel[o, ic, 1, 0]
                w11 = kernel[o, ic, 1, 1]
                w12 = kernel[o, ic, 1, 2]
                w20 = kernel[o, ic, 2, 0]
                w21 = kernel[o, ic, 2, 1]
                w22 = kernel[o, ic, 2, 2]
                for y in range(h):
                    r0 = pad[b, ic, y]
                    r1 = pad[b, ic, y + 1]
                    r2 = pad[b, ic, y + 2]
                    orow = out[b, o, y]
                    for x in range(w):
                        orow[x] += (
                            w00 * r0[x]
                            + w01 * r0[x + 1]
                            + w02 * r0[x + 2]
                            + w10 * r1[x]
                            + w11 * r1[x + 1]
                            + w12 * r1[x + 2]
                            + w20 * r2[x]
                            + w21 * r2[x + 1]
                            + w22 * r2[x + 2]
                        )
    return out


@njit(cache=True, nogil=True)
def maxpool2x2_forward(inp):
    n, c, h, w = inp.shape
    oh, ow = h // 2, w // 2
    out = np.empty((n, c, oh, ow), dtype=inp.dtype)
    argmax = np.empty((n, c, oh, ow), dtype=np.int64)
    for b in range(n):
        for ch in range(c):
            plane = (b * c + ch) * h * w
            for oy in range(oh):
                iy = oy * 2
                for ox in range(ow):
                    ix = ox * 2
                    best = inp[b, ch, iy, ix]
                    bi = plane + iy * w + ix
                    # strict > keeps the first cell in row-major scan on ties
                    for dy in range(2):
                        for dx in range(2):
                            v = inp[b, ch, iy + dy, ix + dx]
                            if v > best:
                                best = v
                                bi = plane + (iy + dy) * w + (ix + dx)
                    out[b, ch, oy, ox] = best
                    argmax[b, ch, oy, ox] = bi
    return out, argmax


@njit(cache=True, nogil=True)
def maxpool2x2_backward(output_grad, argmax, input_shape):
    size = input_shape[0] * input_shape[1] * input_shape[2] * input_shape[3]
    flat = np.zeros(size, dtype=output_grad.dtype)
    g = output_grad.ravel()
    a = argmax.ravel()
    for i in range(a.size):
        flat[a[i]] = g[i]
    return flat.reshape(input_shape)


@njit(cache=True, nogil=True)
def avgpool2x2_forward(inp):
    n, c, h, w = inp.shape
    oh, ow = h // 2, w // 2
    out = np.empty((n, c, oh, ow), dtype=inp.dtype)
    quarter = np.float32(0.25)
    for b in range(n):
        for ch in range(c):
            for oy in range(oh):
                iy = oy * 2
                for ox in range(ow):
                    ix = ox * 2
                    out[b, ch, oy, ox] = (
                        inp[b, ch, iy, ix]
                        + inp[b, ch, iy, ix + 1]
                        + inp[b, ch, iy + 1, ix]
                        + inp[b, ch, iy + 1, ix + 1]
                    ) * quarter
    return out


@njit(cache=True, nogil=True)
def avgpool2x2_backward(output_grad, input_shape):
    n, c, h, w = input_shape
    out = np.empty((n, c, h, w), dtype=output_grad.dtype)
    quarter = np.float32(0.25)
    for b in range(n):
        for ch in range(c):
            for y in range(h):
                oy = y // 2
                for x in range(w):
                    out[b, ch, y, x] = output_grad[b, ch, oy, x // 2] * quarter
    return out
