"""Time the numba kernels against their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once untimed per backend (numba compiles on first call),
then ``--repeat`` timed runs; the best time is reported along with the
largest absolute disagreement between the two backends.
"""

import argparse
import time

import numpy as np

from weatdebias import _accel, _kernels


def _cases(rng):
    h = rng.standard_normal(16)
    members = np.array([rng.permutation(16)[:8] for _ in range(10_000)])

    scores = rng.standard_normal(200_000)
    eligible = rng.random(200_000) < 0.25

    q = rng.standard_normal((20_000, 50))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    refs = q[:56].copy()

    rows = rng.standard_normal((120, 50))
    moved = np.zeros(120, dtype=bool)
    moved[:40] = True
    shifts = rng.standard_normal((98, 50))
    sets = {k: [] for k in "xyab"}
    for t in range(4):
        base = 8 * t
        sets["x"].append(list(range(base, base + 8)))
        sets["y"].append(list(range(40 + base, 40 + base + 8)))
        sets["a"].append(list(range(80, 88)))
        sets["b"].append(list(range(88 + t, 96 + t)))
    packed = []
    for k in "xyab":
        packed.extend(_kernels.pad_index_sets(sets[k]))

    return [
        ("partition_sums 10k x 8", _kernels.partition_sums, (h, members)),
        ("topk k=20 of 200k", _kernels.topk, (scores, eligible, 20)),
        ("max_cosine 20k x 56", _kernels.max_cosine, (q, refs)),
        ("shifted_effect_sizes 98 cand", _kernels.shifted_effect_sizes, (rows, moved, shifts, tuple(packed))),
    ]


def _best(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _accel.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    prev = _accel.get_backend()
    print(f"{'kernel':<30} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'max diff':>10}")
    try:
        for name, fn, fargs in _cases(np.random.default_rng(args.seed)):
            _accel.set_backend("numpy")
            t_np, out_np = _best(fn, fargs, args.repeat)
            _accel.set_backend("numba")
            t_nb, out_nb = _best(fn, fargs, args.repeat)
            diff = float(np.max(np.abs(np.asarray(out_np, float) - np.asarray(out_nb, float))))
            print(f"{name:<30} {1e3 * t_np:10.2f} {1e3 * t_nb:10.2f} {t_np / t_nb:8.1f} {diff:10.1e}")
    finally:
        _accel.set_backend(prev)


if __name__ == "__main__":
    main()
