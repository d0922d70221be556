"""Time the compiled kernels against the pure numpy fallback.

Each backend runs in its own interpreter because SPHEREPOLY_DISABLE_JIT is
read at import time.  Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

CASES = [(2, 200), (3, 200), (3, 1000), (4, 200), (5, 100)]

WORKER = textwrap.dedent("""
    import json, sys, time
    from spherepoly import TParams, convex_hull, t_functional
    from spherepoly._jit import backend
    from spherepoly.geometry.facets import facet_min_dists, facet_volumes
    from spherepoly.rng import stream
    from spherepoly.sampling import uniform_points

    cases, repeat = json.loads(sys.argv[1]), int(sys.argv[2])

    def best(fn):
        fn()  # warm-up, includes compilation on the numba path
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        return min(times)

    rows = []
    for n, N in cases:
        X = uniform_points(stream(11, "bench", n, N), N, n)
        P = convex_hull(X)
        F = P.facet_vertices
        rows.append({
            "n": n, "N": N, "facets": int(P.n_facets),
            "hull_s": best(lambda: convex_hull(X)),
            "volumes_s": best(lambda: facet_volumes(X, F)),
            "min_dists_s": best(lambda: facet_min_dists(X, F)),
            "t_functional_s": best(lambda: t_functional(convex_hull(X), TParams(1.0, 1.0))),
        })
    print(json.dumps({"backend": backend(), "rows": rows}))
""")


def run_backend(disable_jit, repeat):
    env = dict(os.environ)
    env.pop("SPHEREPOLY_DISABLE_JIT", None)
    if disable_jit:
        env["SPHEREPOLY_DISABLE_JIT"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKER, json.dumps(CASES), str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print raw timings as JSON")
    args = ap.parse_args(argv)

    fast = run_backend(False, args.repeat)
    slow = run_backend(True, args.repeat)
    if args.json:
        print(json.dumps({"jit": fast, "fallback": slow}, indent=2))
        return 0

    keys = ["hull_s", "volumes_s", "min_dists_s", "t_functional_s"]
    print(f"{fast['backend']} vs {slow['backend']}, best of {args.repeat}, milliseconds")
    print(f"{'n':>2} {'N':>5} {'F':>5}  {'kernel':<13}{'jit':>10}{'fallback':>12}{'speedup':>9}")
    for a, b in zip(fast["rows"], slow["rows"]):
        for k in keys:
            print(f"{a['n']:>2} {a['N']:>5} {a['facets']:>5}  {k[:-2]:<13}"
                  f"{a[k] * 1e3:>10.3f}{b[k] * 1e3:>12.3f}{b[k] / a[k]:>9.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
