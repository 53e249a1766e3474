"""Timing comparison between the compiled conv kernels and the numpy fallback.

Runs im2col / col2im on the two convolution shapes the pixel networks use,
then times a full forward+backward pass of the conv trunk under each
backend. Usage:

    python3 benchmarks/bench_conv_kernels.py
"""

import time

import numpy as np

from aclab.nn import backend, kernels_np
from aclab.nn.layers import Conv2d, Relu

try:
    from aclab.nn import _convkernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeats=10):
    fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times) * 1000.0


def bench_kernels():
    rng = np.random.default_rng(0)
    shapes = [
        ("conv1 input", (32, 1, 42, 42), 8, 4),
        ("conv2 input", (32, 32, 9, 9), 4, 2),
    ]
    print(f"{'kernel':<22} {'numpy ms':>10} {'compiled ms':>12} {'speedup':>9}")
    for name, shape, k, s in shapes:
        x = rng.normal(size=shape)
        cols_np = kernels_np.im2col(x, k, s)
        t_np = best_of(lambda: kernels_np.im2col(x, k, s))
        if compiled is not None:
            cols_c = compiled.im2col(x, k, s)
            assert np.allclose(cols_np, cols_c, atol=1e-12)
            t_c = best_of(lambda: compiled.im2col(x, k, s))
            print(f"im2col {name:<15} {t_np:>10.3f} {t_c:>12.3f} {t_np / t_c:>8.1f}x")
        else:
            print(f"im2col {name:<15} {t_np:>10.3f} {'n/a':>12} {'':>9}")
        t_np = best_of(lambda: kernels_np.col2im(cols_np, shape, k, s))
        if compiled is not None:
            back_np = kernels_np.col2im(cols_np, shape, k, s)
            back_c = compiled.col2im(cols_np, shape, k, s)
            assert np.allclose(back_np, back_c, atol=1e-12)
            t_c = best_of(lambda: compiled.col2im(cols_np, shape, k, s))
            print(f"col2im {name:<15} {t_np:>10.3f} {t_c:>12.3f} {t_np / t_c:>8.1f}x")
        else:
            print(f"col2im {name:<15} {t_np:>10.3f} {'n/a':>12} {'':>9}")


def bench_trunk():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(32, 1, 42, 42))

    def run_once():
        layers = [Conv2d(1, 32, 8, 4, rng=rng), Relu(), Conv2d(32, 64, 4, 2, rng=rng), Relu()]
        h = x
        for layer in layers:
            h = layer.forward(h)
        g = np.ones_like(h)
        for layer in reversed(layers):
            g = layer.backward(g)

    saved = (backend.im2col, backend.col2im, backend.COMPILED)
    try:
        backend.im2col, backend.col2im = kernels_np.im2col, kernels_np.col2im
        t_np = best_of(run_once, repeats=5)
        print(f"\ntrunk fwd+bwd (batch 32), numpy backend:    {t_np:8.2f} ms")
        if compiled is not None:
            backend.im2col, backend.col2im = compiled.im2col, compiled.col2im
            t_c = best_of(run_once, repeats=5)
            print(f"trunk fwd+bwd (batch 32), compiled backend: {t_c:8.2f} ms ({t_np / t_c:.1f}x)")
    finally:
        backend.im2col, backend.col2im, backend.COMPILED = saved


if __name__ == "__main__":
    print(f"active backend at import: {backend.backend_name()}")
    if compiled is None:
        print("compiled extension not built; showing numpy fallback only")
    bench_kernels()
    bench_trunk()
