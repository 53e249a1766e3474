# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled convolution kernels: im2col / col2im for the conv layers.

Layout matches kernels_np (patches flattened in channel, row, col order).
"""

import numpy as np


def im2col(double[:, :, :, ::1] x, int kernel, int stride):
    cdef Py_ssize_t b = x.shape[0]
    cdef Py_ssize_t c = x.shape[1]
    cdef Py_ssize_t h = x.shape[2]
    cdef Py_ssize_t w = x.shape[3]
    cdef Py_ssize_t out_h = (h - kernel) // stride + 1
    cdef Py_ssize_t out_w = (w - kernel) // stride + 1
    out = np.empty((b, out_h * out_w, c * kernel * kernel), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t bi, ci, oi, oj, ki, kj, p, f
    with nogil:
        for bi in range(b):
            for oi in range(out_h):
                for oj in range(out_w):
                    p = oi * out_w + oj
                    f = 0
                    for ci in range(c):
                        for ki in range(kernel):
                            for kj in range(kernel):
                                o[bi, p, f] = x[bi, ci, oi * stride + ki, oj * stride + kj]
                                f += 1
    return out


def col2im(double[:, :, ::1] cols, input_shape, int kernel, int stride):
    cdef Py_ssize_t b = input_shape[0]
    cdef Py_ssize_t c = input_shape[1]
    cdef Py_ssize_t h = input_shape[2]
    cdef Py_ssize_t w = input_shape[3]
    cdef Py_ssize_t out_h = (h - kernel) // stride + 1
    cdef Py_ssize_t out_w = (w - kernel) // stride + 1
    out = np.zeros((b, c, h, w), dtype=np.float64)
    cdef double[:, :, :, ::1] o = out
    cdef Py_ssize_t bi, ci, oi, oj, ki, kj, p, f
    with nogil:
        for bi in range(b):
            for oi in range(out_h):
                for oj in range(out_w):
                    p = oi * out_w + oj
                    f = 0
                    for ci in range(c):
                        for ki in range(kernel):
                            for kj in range(kernel):
                                o[bi, ci, oi * stride + ki, oj * stride + kj] += cols[bi, p, f]
                                f += 1
    return out
