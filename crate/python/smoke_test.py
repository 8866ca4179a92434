#!/usr/bin/env python3
"""Smoke test for the fracmix_py extension module.

Builds the cdylib if needed, loads it, and exercises synthesis, the two-step
estimator, and the Whittle fit on a small mixed pair.

Usage: python3 python/smoke_test.py
"""

import math
import os
import shutil
import subprocess
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def ensure_module():
    lib = os.path.join(ROOT, "target", "release", "libfracmix_py.so")
    if not os.path.exists(lib):
        subprocess.run(
            ["cargo", "build", "--release", "-p", "fracmix-py"], cwd=ROOT, check=True
        )
    dest = os.path.join(ROOT, "python", "fracmix_py.so")
    if not os.path.exists(dest) or os.path.getmtime(lib) > os.path.getmtime(dest):
        shutil.copyfile(lib, dest)
    sys.path.insert(0, os.path.join(ROOT, "python"))


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    ensure_module()
    import fracmix_py as fm

    print(f"fracmix_py {fm.__version__}")

    # Closed-form autocovariance.
    assert close(fm.fgn_autocov(0.5, 1), 0.0, 1e-15)
    assert close(fm.fgn_autocov(0.8, 1), (2 ** 1.6 - 2) / 2, 1e-12)

    # Deterministic synthesis.
    a = fm.synth_fgn(0.7, 512, 9)
    b = fm.synth_fgn(0.7, 512, 9)
    assert a == b, "same seed must give identical paths"
    assert len(fm.synth_fbm(0.5, 256, 1)) == 256
    assert len(fm.synth_farima(0.3, 256, 1)) == 256
    assert len(fm.synth_fou(1.0, 0.6, 128, 0.1, 1)) == 128

    # Daubechies-2 filters: sum h = sqrt(2).
    lp, hp = fm.daubechies_filters(2)
    assert close(sum(lp), math.sqrt(2), 1e-12)
    assert close(sum(hp), 0.0, 1e-12)

    # Mixed pair: estimate back the Hurst exponents and the mixing matrix.
    p = [[0.78, 0.62], [0.62, 0.78]]
    hidden, mixed = fm.synth_mixed(p, [("fgn", 0.3, None), ("fgn", 0.9, None)], 8192, 2024)
    assert len(mixed) == 2 and len(mixed[0]) == 8192
    result = fm.two_step(mixed, j1=1, j2=6, classes=[("fgn", 0.3, None), ("fgn", 0.9, None)], ci_level=0.95)
    h1, h2 = result["h_hat"]
    print(f"two_step: h_hat = ({h1:.3f}, {h2:.3f}), eigengap = {result['eigengap']:.3f}")
    assert close(h1, 0.3, 0.15), h1
    assert close(h2, 0.9, 0.15), h2
    p_hat = result["p_hat"]
    for i in range(2):
        for j in range(2):
            assert close(p_hat[i][j], p[i][j] / math.hypot(p[0][j], p[1][j]), 0.2)

    # Difference statistic clears the CI half-widths comfortably.
    ci = result["ci_halfwidth"]
    assert ci is not None and all(c > 0 for c in ci)

    # ACF and pre-whitening plumbing.
    rho = fm.acf(mixed[0], 5)
    assert close(rho[0], 1.0, 1e-12)
    _, order = fm.prewhiten(mixed[0][:2000], 10)
    assert 0 <= order <= 10

    # Whittle fit on a short pair (kept small: the fit is the slow baseline).
    _, y_small = fm.synth_mixed(p, [("fgn", 0.3, None), ("fgn", 0.9, None)], 512, 7)
    fit = fm.whittle_fit(y_small, m=50)
    print(f"whittle: h = ({fit['h1']:.3f}, {fit['h2']:.3f}), nll = {fit['nll']:.1f}, "
          f"{fit['iterations']} evals in {fit['wall_time_s']:.2f}s")
    assert 0.0 < fit["h1"] < 1.0 and 0.0 < fit["h2"] < 1.0

    print("smoke test passed")


if __name__ == "__main__":
    main()
