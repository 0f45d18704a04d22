"""Smoke test for the rcdfs extension module.

Build first with `cargo build -p rcdfs-py --release` (or a debug build),
then run `python3 python/smoke_test.py`.
"""

import importlib.machinery
import importlib.util
import json
import math
import os
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load_module():
    for profile in ("release", "debug"):
        for name in ("librcdfs.so", "librcdfs.dylib", "rcdfs.dll"):
            path = os.path.join(ROOT, "target", profile, name)
            if os.path.exists(path):
                loader = importlib.machinery.ExtensionFileLoader("rcdfs", path)
                spec = importlib.util.spec_from_file_location("rcdfs", path, loader=loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                return module
    sys.exit("extension not built: run `cargo build -p rcdfs-py` first")


def main():
    rcdfs = load_module()
    print("rcdfs", rcdfs.__version__)

    # F0 duplicated as F1, F2 weaker and independent
    dup = rcdfs.synth_duplicate(4)
    assert abs(rcdfs.mutual_information(dup, 0) - 1.0) < 1e-12
    assert abs(rcdfs.pairwise_cor(dup, 1, 0) - 1.0) < 1e-12
    assert sorted(rcdfs.select(dup, "rcdfs", 2).selected) == [0, 2]
    assert sorted(rcdfs.select(dup, "mim", 2).selected) == [0, 1]
    assert rcdfs.select_reference(dup, 2).selected == rcdfs.select(dup, delta=2).selected

    t = rcdfs.DiscreteTable([[0, 0, 1, 1], [0, 1, 0, 1]], [0, 1, 1, 0])
    assert abs(rcdfs.conditional_mutual_information(t, 0, None, 1) - 1.0) < 1e-12
    assert abs(rcdfs.symmetrical_uncertainty(t, 0, 1)) < 1e-12

    trace = rcdfs.select(rcdfs.synth_planted(1, 200, 10), "relieff", 3, seed=4)
    assert len(trace) == 3 and len(trace.weights) == 10
    json.loads(trace.to_json())

    cuts = rcdfs.fit_cuts([1, 2, 3, 10, 11, 12], [0, 0, 0, 1, 1, 1])
    assert cuts == [6.5]
    assert rcdfs.apply_cuts(cuts, [5.0, 6.5, 7.0]) == [0, 1, 1]

    _, p = rcdfs.wilcoxon_rank_sum([1, 2, 3, 4, 5], [6, 7, 8, 9, 10])
    assert abs(p - 2 / 252) < 1e-12
    chi2, p = rcdfs.friedman_test([[1.0] * 10, [2.0] * 10, [3.0] * 10])
    assert abs(chi2 - 20) < 1e-9 and abs(p - math.exp(-10)) < 1e-12

    planted = rcdfs.synth_planted(0, 200, 12)
    errors = rcdfs.curve(planted, "rcdfs", 4, folds=5, repeats=2)
    assert len(errors) == 4 and all(0 <= e <= 1 for e in errors)
    report = json.loads(rcdfs.compare(planted, ["rcdfs", "mim"], folds=5, repeats=2))
    assert report["reference"] == "rcdfs"

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "t.csv")
        with open(path, "w") as f:
            f.write("colour,size,label\nred,1.0,a\nblue,2.5,b\nred,?,a\nblue,3.0,b\n")
        loaded = rcdfs.load(path, "label")
        assert loaded.feature_names == ["colour", "size"]
        assert loaded.n_rows == 4

    try:
        rcdfs.select(dup, "nope")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown method accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
