"""Compare the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--packets N] [--repeat R]
"""
import argparse
import timeit

from rpssps import _kernels_py, kernels
from rpssps.rps import derive_factors
from rpssps.timebase import SlotGrid, TrafficSpec, slot_start


def workloads(packets):
    traffic, grid = TrafficSpec(2800, 0, packets), SlotGrid(71)
    f = derive_factors(traffic, grid)
    cf = (1, packets, f.periods, f.directions, f.positions)
    slots = _kernels_py.closed_form_slots(*cf)
    starts = [slot_start(i, grid) for i in slots]
    arrivals = [k * 2800 for k in range(packets)]
    return {
        "closed_form_slots": lambda impl: impl.closed_form_slots(*cf),
        "greedy_slots": lambda impl: impl.greedy_slots(packets, 0, 2800, 71),
        "match": lambda impl: impl.match(starts, arrivals, 2800),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--packets", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = {"python": _kernels_py}
    if kernels.BACKEND == "cython":
        impls["cython"] = kernels.use_backend("cython")
    else:
        print("compiled extension not available; timing the fallback only")
    print(f"packets={args.packets} repeat={args.repeat} (best of, ms)")
    print(f"{'kernel':<20}" + "".join(f"{k:>10}" for k in impls) + f"{'speedup':>10}")
    for name, fn in workloads(args.packets).items():
        best = {k: min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat)) * 1e3
                for k, impl in impls.items()}
        speed = f"{best['python'] / best['cython']:.1f}x" if "cython" in best else "-"
        print(f"{name:<20}" + "".join(f"{v:>10.2f}" for v in best.values()) + f"{speed:>10}")


if __name__ == "__main__":
    main()
