"""Compare the numba and numpy CHSH kernels on random correlation tensors.

    python3 benchmarks/bench_kernels.py [--tensors 200] [--repeat 3]

Both backends must agree on every result; timings exclude numba compilation.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from fermibell import _kernels
from fermibell.bell import GRID_STEP


def random_tensors(n: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        q1, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        q2, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        out.append(q1 @ np.diag(np.sort(rng.uniform(0, 1, 3))[::-1]) @ q2.T)
    return out


def tables(ts: list[np.ndarray]) -> list[np.ndarray]:
    al = np.arange(24) * GRID_STEP
    be = np.arange(48) * GRID_STEP
    res = []
    for t in ts:
        p, _, qt = np.linalg.svd(t)
        a = np.outer(np.cos(al), p[:, 0]) + np.outer(np.sin(al), p[:, 1])
        b = np.outer(np.cos(be), qt[0]) + np.outer(np.sin(be), qt[1])
        res.append(a @ t @ b.T)
    return res


def run(backend: str, ts, fs, repeat: int) -> tuple[float, float, list]:
    results = []
    best_grid = best_asc = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        grid = [_kernels.grid_search(f, backend=backend) for f in fs]
        t1 = time.perf_counter()
        starts = [np.full(8, 0.3) + 0.1 * np.arange(8) for _ in ts]
        asc = [_kernels.coordinate_ascent(t, x0, backend=backend) for t, x0 in zip(ts, starts)]
        t2 = time.perf_counter()
        best_grid = min(best_grid, t1 - t0)
        best_asc = min(best_asc, t2 - t1)
        results = [(g, a[0]) for g, a in zip(grid, asc)]
    return best_grid, best_asc, results


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tensors", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ts = random_tensors(args.tensors, args.seed)
    fs = tables(ts)
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if "numba" in backends:
        # warm-up compiles the jitted kernels
        _kernels.grid_search(fs[0], backend="numba")
        _kernels.coordinate_ascent(ts[0], np.zeros(8), backend="numba")

    timings = {}
    outputs = {}
    for b in backends:
        g, a, res = run(b, ts, fs, args.repeat)
        timings[b] = (g, a)
        outputs[b] = res
        print(f"{b:>6}: grid {1e3 * g:8.2f} ms   ascent {1e3 * a:8.2f} ms   ({args.tensors} tensors, best of {args.repeat})")

    if "numba" in outputs:
        for (g1, v1), (g2, v2) in zip(outputs["numpy"], outputs["numba"]):
            assert g1[1:] == g2[1:] and abs(g1[0] - g2[0]) < 1e-12, (g1, g2)
            assert abs(v1 - v2) < 1e-9, (v1, v2)
        sg = timings["numpy"][0] / timings["numba"][0]
        sa = timings["numpy"][1] / timings["numba"][1]
        print(f"backends agree; numba speedup: grid x{sg:.1f}, ascent x{sa:.1f}")


if __name__ == "__main__":
    main()
