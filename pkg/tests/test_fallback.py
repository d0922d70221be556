"""The pure numpy path (SPHEREPOLY_DISABLE_JIT=1) must agree with the compiled one."""

import json
import os
import subprocess
import sys
import textwrap

import numpy as np

from spherepoly import TParams, convex_hull, t_functional
from spherepoly._jit import backend
from spherepoly.rng import stream
from spherepoly.sampling import uniform_points

SCRIPT = textwrap.dedent("""
    import json
    from spherepoly import TParams, convex_hull, t_functional
    from spherepoly._jit import backend
    from spherepoly.rng import stream
    from spherepoly.sampling import uniform_points
    out = {"backend": backend(), "cases": []}
    for n, N in [(2, 30), (3, 60), (4, 40), (5, 25)]:
        P = convex_hull(uniform_points(stream(7, "fb", n), N, n))
        out["cases"].append({
            "facets": sorted(map(sorted, P.facet_vertices.tolist())),
            "vol": P.volumes.tolist(),
            "dmin": P.min_dists.tolist(),
            "T": t_functional(P, TParams(1.5, 0.5)),
        })
    print(json.dumps(out))
""")


def _run(disable):
    env = dict(os.environ)
    env.pop("SPHEREPOLY_DISABLE_JIT", None)
    if disable:
        env["SPHEREPOLY_DISABLE_JIT"] = "1"
    res = subprocess.run([sys.executable, "-c", SCRIPT], capture_output=True, text=True,
                         env=env, check=True)
    return json.loads(res.stdout)


def test_backends_agree():
    fast = _run(False)
    slow = _run(True)
    assert fast["backend"] == "numba"
    assert slow["backend"] == "python"
    for a, b in zip(fast["cases"], slow["cases"]):
        assert a["facets"] == b["facets"]
        # facet ordering is identical, values agree to rounding
        assert np.allclose(a["vol"], b["vol"], rtol=1e-12, atol=0)
        assert np.allclose(a["dmin"], b["dmin"], rtol=1e-12, atol=0)
        assert abs(a["T"] - b["T"]) <= 1e-12 * abs(a["T"])


def test_in_process_backend_matches_subprocess():
    if backend() != "numba":
        return
    fast = _run(False)
    P = convex_hull(uniform_points(stream(7, "fb", 3), 60, 3))
    assert t_functional(P, TParams(1.5, 0.5)) == fast["cases"][1]["T"]
