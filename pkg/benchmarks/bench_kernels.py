#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Run after an editable install:

    python3 benchmarks/bench_kernels.py [--repeat 5]

Workloads mirror the pipeline's hot paths: resampling an hour of 44.1 kHz
audio, pre-emphasis + framing at MFCC rates, frame-difference scans over a
long downsampled frame stack, and row cosines at gate scale.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from omnivale import _kernels_np

try:
    from omnivale import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def workloads():
    rng = np.random.default_rng(0)
    hour_audio = np.ascontiguousarray(rng.standard_normal(44_100 * 3600 // 10))  # 6 min
    analysis_audio = np.ascontiguousarray(rng.standard_normal(16_000 * 360))  # 6 min @16k
    window = np.hanning(400)
    frames = np.ascontiguousarray(rng.standard_normal((7200, 36 * 64)))  # 1 h @2 fps, 64x36
    mfcc = np.ascontiguousarray(rng.standard_normal((36_000, 13)))
    gate_a = np.ascontiguousarray(rng.standard_normal((5000, 256)))
    gate_b = np.ascontiguousarray(rng.standard_normal((5000, 256)))

    n_out = int(round(hour_audio.shape[0] * 16_000 / 44_100))
    ratio = 44_100 / 16_000
    return [
        ("resample 6 min 44.1k->16k", lambda impl: impl.resample_linear(hour_audio, n_out, ratio)),
        ("preemphasis 6 min @16k", lambda impl: impl.preemphasis(analysis_audio, 0.97)),
        (
            "frame+window 6 min @16k",
            lambda impl: impl.frame_windows(impl.preemphasis(analysis_audio, 0.97), 400, 160, window),
        ),
        ("frame diffs 1 h @2 fps", lambda impl: impl.mean_abs_rowdiff(frames)),
        ("MFCC deltas 6 min", lambda impl: impl.mean_abs_rowdiff(mfcc)),
        ("row cosines 5000x256", lambda impl: impl.rowwise_cosine(gate_a, gate_b)),
    ]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    impls = [("numpy", _kernels_np)]
    if _kernels is not None:
        impls.append(("cython", _kernels))
    else:
        print("compiled extension not available; benchmarking the fallback only")

    rows = []
    for name, fn in workloads():
        times = {}
        for impl_name, impl in impls:
            times[impl_name] = _time(lambda: fn(impl), args.repeat)
        rows.append((name, times))

    width = max(len(name) for name, _ in rows)
    header = f"{'workload':<{width}}  " + "".join(f"{n:>12}" for n, _ in impls)
    if len(impls) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, times in rows:
        line = f"{name:<{width}}  " + "".join(f"{times[n] * 1000:>10.2f}ms" for n, _ in impls)
        if len(impls) == 2:
            line += f"{times['numpy'] / times['cython']:>9.2f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
