"""Smoke test for the Python bindings.

Build first, then run from the repository root:

    cargo build --release -p schwarz-lab-py --features extension-module
    python3 python/smoke_test.py
"""

import importlib.util
import math
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    try:
        import schwarz_lab_py

        return schwarz_lab_py
    except ImportError:
        pass
    lib = ROOT / "target" / "release" / "libschwarz_lab_py.so"
    spec = importlib.util.spec_from_file_location("schwarz_lab_py", lib)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    sl = load()
    small = "[grid]\nn0 = 4\nn1 = 16\nlayers = 1\n"

    cfg = sl.Config(small)
    cfg.seed = 3
    assert cfg.seed == 3 and len(cfg.hash()) > 0
    problem = sl.Problem(cfg)
    assert problem.n == 16
    lmin, lmax, kappa = problem.spectrum()
    assert 0 < lmin < lmax and math.isclose(kappa, lmax / lmin, rel_tol=1e-9)
    px = problem.apply_p([0.0] * problem.dim)
    assert all(v == 0.0 for v in px)

    report = problem.run()
    assert report.converged and report.iterations > 0
    assert report.records[-1][1] == 0
    assert report.to_csv().count("\n") == len(report.records) + 2

    local = sl.Config(small + '[faults]\nnetwork = "local"\nprocess = "weibull"\nl = 2\n')
    faulty = sl.Problem(local)
    trace = faulty.scenario(seed=5)
    a = faulty.run(seed=5)
    b = faulty.run(seed=5, trace=trace)
    assert a.records == b.records

    w = sl.Weibull(0.5, 18.0)
    assert math.isclose(w.mean(), 36.0, rel_tol=1e-12)
    assert math.isclose(w.cdf(w.transform(0.25)), 0.75, rel_tol=1e-12)
    counts, rate = sl.down_counts(50, w, sl.Weibull(1.0, 3.0), 200, 1)
    assert len(counts) == 200 and 0.0 < rate < 0.3

    _, factor = sl.partition_rate_bound(9, [[0], list(range(1, 10))], [1, 8], 4.0, 5.0)
    assert math.isclose(factor, 1 - 64 / (81 * 5.0))
    assert math.isclose(sl.multi_fault_rates(100, 2, 4, 1)[0], 2 / 3)

    times = dict(sl.cycle_times())
    assert times["local"] == 12416.0 and times["server-client"] == 28900.0

    try:
        sl.Config("[grid]\nbogus = 1\n")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown field accepted")

    print("smoke test passed: %d iterations, kappa %.3f" % (report.iterations, kappa))


if __name__ == "__main__":
    sys.exit(main())
