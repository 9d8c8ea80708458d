"""Smoke test for the pyneolith extension module.

Build first:
    cargo build --release -p neolith-py --features extension-module
then run `python3 python/smoke_test.py`. If `pyneolith` is not installed the
script loads target/release/libpyneolith.so directly.
"""

import importlib.util
import json
import math
import pathlib
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    try:
        import pyneolith

        return pyneolith
    except ImportError:
        pass
    lib = ROOT / "target" / "release" / "libpyneolith.so"
    if not lib.exists():
        sys.exit(f"pyneolith not importable and {lib} missing; build it first")
    spec = importlib.util.spec_from_file_location("pyneolith", lib)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def check(name, cond, detail=""):
    print(f"{'ok  ' if cond else 'FAIL'} {name} {detail}")
    return cond


def main():
    nl = load_module()
    results = []

    m = nl.ModelParams(1.0, g=0.5)
    d = m.derived()
    results.append(check("derived c_star", abs(d["c_star"] - 2 * math.sqrt(2)) < 1e-12, d["c_star"]))
    results.append(check("figure", m.figure() == 4, m.regime()))

    orig = {"D_f": 2, "D_c": 1, "D_h": 4, "r_f": 3, "r_c": 1, "r_h": 2, "K": 1, "L": 1, "e": 1}
    o = nl.ModelParams.from_original(orig)
    results.append(check("nondimensionalize", (o.a, o.b, o.d_c, o.d_h) == (3.0, 2.0, 0.5, 2.0), repr(o)))

    try:
        nl.ModelParams(-1.0)
        results.append(check("negative a rejected", False))
    except ValueError:
        results.append(check("negative a rejected", True))

    rec = nl.simulate(m, 40.0, snapshot_interval=10.0)
    t, f, c, h = rec.snapshot(-1)
    results.append(check("snapshots", len(rec) == 5 and t == 40.0 and len(f) == len(rec.x), len(rec)))
    front = [x for (_, x) in rec.front("C", 0.5) if x is not None]
    speed = (front[-1] - front[len(front) // 2]) / 20.0
    results.append(check("front speed", abs(speed / d["c_star"] - 1) < 0.05, speed))
    rep = rec.final_zone_report()
    results.append(check("final zone report", rep["pass"], [v["clause"] for v in rep["verdicts"]]))

    with tempfile.TemporaryDirectory() as tmp:
        rec.save(tmp)
        back = nl.Record.load(tmp)
        results.append(check("save/load", back.snapshot(-1) == rec.snapshot(-1)))

    w = nl.traveling_wave(1.0, 3.0)
    results.append(check("wave lambda1", abs(w["lambda1"] - 0.302776) < 1e-6, w["lambda1"]))
    results.append(check("wave profile", len(w["xi"]) == len(w["V"]) and w["V"][0] > 0.999))

    traj = nl.ode_trajectory(1.0, 1.0, t_end=100.0)
    tc, cc, hc = traj[-1]
    results.append(check("ode terminal", abs(cc - 4 / 3) < 1e-6 and abs(hc - 1 / 3) < 1e-6, (cc, hc)))
    results.append(check("lyapunov at equilibrium", abs(nl.lyapunov(4 / 3, 1 / 3)) < 1e-14))

    spec = {"kind": "SuperPair", "d_c": 0.5, "c0": 2.5, "c1": 3.2, "q": 0.19, "tau": 0.05, "B1": 1.0}
    cert = nl.certify(json.dumps(spec), 200.0, 2.5, 400.0, escalate_cap=1e4)
    results.append(check("certificate", cert["pass"], cert["violation_count"]))

    v = nl.kpp_speed(1.0, 1.0, 100.0)
    results.append(check("kpp speed", abs(v / 2 - 1) < 0.03, v))

    passed = sum(results)
    print(f"{passed} of {len(results)} checks passed")
    return 0 if passed == len(results) else 1


if __name__ == "__main__":
    sys.exit(main())
