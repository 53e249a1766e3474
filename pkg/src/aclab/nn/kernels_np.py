"""Pure-numpy convolution kernels.

Fallback used when the compiled extension is not built. Both backends share
the same layout: patches are flattened in (channel, row, col) order so that
``cols @ weight.reshape(out_ch, -1).T`` computes the convolution.
"""

import numpy as np


def im2col(x, kernel, stride):
    """Extract valid-padding patches from (B, C, H, W) into (B, P, C*k*k).

    P = out_h * out_w with out_side = (side - kernel) // stride + 1.
    """
    b, c, h, w = x.shape
    out_h = (h - kernel) // stride + 1
    out_w = (w - kernel) // stride + 1
    windows = np.lib.stride_tricks.sliding_window_view(x, (kernel, kernel), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]  # (B, C, out_h, out_w, k, k)
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(b, out_h * out_w, c * kernel * kernel)
    return np.ascontiguousarray(cols)


def col2im(cols, input_shape, kernel, stride):
    """Scatter-add patch gradients back onto the input grid (inverse of im2col)."""
    b, c, h, w = input_shape
    out_h = (h - kernel) // stride + 1
    out_w = (w - kernel) // stride + 1
    patches = cols.reshape(b, out_h, out_w, c, kernel, kernel).transpose(0, 3, 1, 2, 4, 5)
    out = np.zeros(input_shape, dtype=cols.dtype)
    # Overlapping windows forbid a single vectorized scatter; k*k strided adds suffice.
    for ki in range(kernel):
        for kj in range(kernel):
            out[:, :, ki:ki + stride * out_h:stride, kj:kj + stride * out_w:stride] += (
                patches[:, :, :, :, ki, kj]
            )
    return out
