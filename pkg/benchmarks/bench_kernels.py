"""Time the numba kernels against their numpy fallbacks on the largest corpus algebra.

    python benchmarks/bench_kernels.py --m 2 --n 2 --repeat 3

Both backends must return the same first violation (or none); the script
exits non-zero if they disagree.
"""
import argparse
import sys
import time

import numpy as np

from menger import kernels
from menger.algebra import chi, zeta
from menger.enumeration import abstractify, enumerate_closed, universe
from menger.representation import build_eg_wg, simplest_representation


def cases(alg, uni, gens):
    G, n = alg.size, alg.rank
    z = zeta(alg).matrix
    c = chi(alg).matrix
    g = int(np.argmax(c.sum(axis=1) < G)) if (c.sum(axis=1) < G).any() else 0
    rep = simplest_representation(alg, build_eg_wg(alg, g), g)
    T = np.asarray(rep.tables, dtype=np.int64)
    return {
        "A1": lambda b: kernels.a1_violation(alg.sup, G, n, backend=b),
        "A3": lambda b: kernels.a3_violation(alg.sup, alg.r, G, n, backend=b),
        "A10": lambda b: kernels.a10_violation(alg.sup, alg.meet, G, n, backend=b),
        "stable(zeta)": lambda b: kernels.stable_violation(alg.sup, z, G, n, backend=b),
        "v_regular(chi)": lambda b: kernels.v_regular_violation(alg.sup, c, G, n, backend=b),
        "l_regular(chi)": lambda b: kernels.l_regular_violation(alg.sup, c, G, n, backend=b),
        "i_regular(zeta)": lambda b: kernels.i_regular_violation(alg.sup, z, 0, G, n, backend=b),
        "homomorphism": lambda b: kernels.homomorphism_violation(alg.sup, T, G, n, rep.base, backend=b),
        "closure": lambda b: kernels.closure_codes(uni.comp, uni.meet, uni.rt, uni.size, uni.n,
                                                   gens, 512, backend=b),
    }


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    algebras = enumerate_closed(args.m, args.n)
    phi = max(algebras, key=len)
    alg, _ = abstractify(phi)
    uni = universe(args.m, args.n)
    gens = uni.encode(phi.tables[-2:])
    print(f"algebra: m={args.m} n={args.n} size={alg.size}")
    print(f"{'kernel':<18}{'numba s':>10}{'numpy s':>10}{'speedup':>9}")
    bad = 0
    for name, fn in cases(alg, uni, gens).items():
        fn("numba")  # compile outside the timed region
        t_nb, r_nb = best_of(lambda: fn("numba"), args.repeat)
        t_np, r_np = best_of(lambda: fn("numpy"), args.repeat)
        same = np.array_equal(np.asarray(r_nb), np.asarray(r_np))
        bad += not same
        flag = "" if same else "  MISMATCH"
        print(f"{name:<18}{t_nb:>10.4f}{t_np:>10.4f}{t_np / max(t_nb, 1e-9):>8.1f}x{flag}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
