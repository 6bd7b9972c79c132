"""Smoke test for the metarepair Python module.

Uses an installed module if there is one, else the library from
`cargo build -p metarepair-py`.
"""
import importlib
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        return importlib.import_module("metarepair")
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libmetarepair.so"
        if lib.exists():
            tmp = tempfile.mkdtemp()
            shutil.copy(lib, os.path.join(tmp, "metarepair.so"))
            sys.path.insert(0, tmp)
            return importlib.import_module("metarepair")
    sys.exit("build the module first: cargo build -p metarepair-py")


def main():
    mr = load()

    m = mr.Method.parse("boolean f(int a, int b) { return a > b; }")
    assert (m.name, m.arity) == ("f", 2)
    t = mr.transform(m, kinds=["SRO"])
    assert t.method.print() == mr.Method.parse("boolean f(int a, int b) { return b < a; }").print()
    assert t.counts["SRO"] == 1

    add = mr.Method.parse("int add(int a, int b) { return a + b; }")
    t = mr.transform(add)
    assert t.method.name == "sum", t.method.name
    assert mr.differential_check(add, t.method, t.rename_map)

    for seed in range(20):
        g = mr.generate_program(seed)
        tg = mr.transform(g)
        assert mr.differential_check(g, tg.method, tg.rename_map, 32, seed)
        assert mr.Method.parse(g.print()).structurally_equal(g)

    a12, label = mr.vargha_delaney([1.0, 1.0, 0.9], [0.0, 0.1, 0.0])
    assert a12 == 0.0 and label == "large"
    stat, p = mr.wilcoxon([-0.5, -0.4, -0.3, -0.6, -0.2, -0.7])
    assert stat == 0.0 and abs(p - 2 / 64) < 1e-12
    rho, _ = mr.spearman([1, 2, 3, 4], [10, 20, 30, 40])
    assert rho == 1.0

    try:
        mr.Method.parse("not a method")
    except ValueError:
        pass
    else:
        raise AssertionError("parse error not raised")
    print("smoke test ok")


if __name__ == "__main__":
    main()
