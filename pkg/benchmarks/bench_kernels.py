"""Time the numba and pure-numpy kernel backends side by side.

    python benchmarks/bench_kernels.py [--repeat 5]

Both implementations are imported from ``biphoton_ft._kernels`` directly,
so the ``BIPHOTON_FT_DISABLE_NUMBA`` flag does not matter here.  Sizes are
those of a desk-scale run: ~10^6 photons per thinning/binning call, one
256-point M(tau) evaluation, and a 121-point sweep inverted onto 1000 delays.
"""
import argparse
import timeit

import numpy as np

from biphoton_ft import _kernels as k
from biphoton_ft.modulator import Sinusoid, Square


def cases():
    rng = np.random.default_rng(0)
    n = 1_000_000
    t = np.sort(rng.random(n)) * n / 325.0
    lag = 175e-9 + rng.random(n) * 600e-9
    u1, u2 = rng.random(n), rng.random(n)
    sin = Sinusoid(35e6).kernel_args()
    sq = Square(35e6).kernel_args()
    taus = np.linspace(0, 2 / 35e6, 256)
    amps = rng.normal(size=121)
    freqs = np.arange(121) * 0.25e6
    tau_out = np.arange(1000) * 1e-9
    return {
        "intensity (1e6 t)": lambda impl: impl["intensity"](*sin, t),
        "thin_mask (1e6 pairs)": lambda impl: impl["thin_mask"](t, lag, u1, u2, 0.5, sin, sin),
        "bin_counts (1e6 delays)": lambda impl: impl["bin_counts"](lag, 0.0, 1e-9, 1000),
        "M(tau) sinusoid (256 x 4096)": lambda impl: impl["simpson_correlation"](sin, sin, taus, 1 / 35e6, 4096),
        "M(tau) square (256 x 65536)": lambda impl: impl["simpson_correlation"](sq, sq, taus, 1 / 35e6, 65536),
        "cosine_sum (121 x 1000)": lambda impl: impl["cosine_sum"](amps, freqs, tau_out),
    }


def backend_table(suffix):
    names = ["intensity", "thin_mask", "bin_counts", "simpson_correlation", "cosine_sum"]
    return {name: getattr(k, f"{name}_{suffix}") for name in names}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not k.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")
    impls = {"numba": backend_table("numba"), "numpy": backend_table("numpy")}
    print(f"{'kernel':32s} {'numba (ms)':>11s} {'numpy (ms)':>11s} {'speed-up':>9s}")
    for label, fn in cases().items():
        fn(impls["numba"])  # compile / load from cache outside the timing
        best = {name: min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat))
                for name, impl in impls.items()}
        print(f"{label:32s} {best['numba'] * 1e3:11.2f} {best['numpy'] * 1e3:11.2f} "
              f"{best['numpy'] / best['numba']:8.1f}x")


if __name__ == "__main__":
    main()
