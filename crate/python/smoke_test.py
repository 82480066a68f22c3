"""Smoke test for the multirank extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml
    pip install target/wheels/multirank-*.whl
"""

import math

import multirank

RING = """nodes 6
layers 2
0 0 1 1
0 2 3 1
0 4 5 1
1 1 2 1
1 3 4 1
1 5 0 1
"""


def close(a, b, tol):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    m = multirank.Multiplex.parse(RING)
    assert (m.n, m.layer_count) == (6, 2)
    assert m.check() == (True, False, 6)
    assert m.multijaccard() == 0.0

    out = multirank.solve(m, config="A0T A0 A1T A1")
    assert len(out["rankings"]) == 4
    for r in out["rankings"]:
        assert abs(sum(r) - 1.0) <= 1e-12
    third = 1.0 / 3.0
    assert close(out["rankings"][0], [0, third, 0, third, 0, third], 1e-8)
    assert multirank.solve(m, preset="hits-like")["rankings"] == out["rankings"]

    assert multirank.parse_config("A0T A0 A1T A1", 2) == ("A0 A1T A1 A0T", 3, "A0T A0 A1T A1")
    assert len(multirank.enumerate(2, k=4)) == 6
    assert [multirank.count_configs(l) for l in (1, 2, 3)] == [3, 24, 415]
    assert "versatile-like" in multirank.presets()

    try:
        multirank.solve(m, config="A5")
    except multirank.DimensionError:
        pass
    else:
        raise AssertionError("layer 5 should be out of range")

    assert abs(multirank.weighted_tau([3, 2, 1, 0], [3, 2, 0, 1]) - 0.8133333333333334) <= 1e-12
    lo, hi, mean = multirank.confidence_interval([1.0, 2.0, 3.0, 4.0])
    assert mean == 2.5 and lo < mean < hi
    assert multirank.cost_model("hits-like", 64) == 790528
    assert multirank.cost_table().splitlines()[1] == "64,8192,266240,532480,790528,524288,266240"

    g = multirank.generate("sbm", n=40, layer_p=1.0, seed=3)
    assert g.multijaccard() == 1.0
    pr = multirank.solve(g, preset="pagerank-like")
    assert len(pr["rankings"]) == 2 and math.isfinite(pr["eigenvalue"])

    csv, summary = multirank.experiment('{"batch": "cost-table"}')
    assert csv.startswith("n,pagerank")
    print("multirank", multirank.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
