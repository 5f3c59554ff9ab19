#!/usr/bin/env python3
"""Smoke test for the trajdk_py extension module.

Builds nothing itself: looks for the compiled cdylib under target/ (release
first, then debug), copies it next to a temp dir as trajdk_py.so and imports
it. Build the module first with:

    cargo build -p trajdk-py --release
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / "release" / "libtrajdk_py.so",
        REPO / "target" / "debug" / "libtrajdk_py.so",
        REPO / "target" / "release" / "libtrajdk_py.dylib",
        REPO / "target" / "debug" / "libtrajdk_py.dylib",
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p trajdk-py")
    staging = Path(tempfile.mkdtemp(prefix="trajdk_py_"))
    shutil.copy(built, staging / "trajdk_py.so")
    sys.path.insert(0, str(staging))
    import trajdk_py

    return trajdk_py


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    tk = load_module()

    # Baseline distances on hand-checked cases.
    approx(tk.dtw([[0.0, 0.0]], [[3.0, 4.0]]), 5.0)
    approx(tk.hausdorff([[0.0, 0.0]], [[0.0, 1.0], [0.0, 2.0]]), 2.0)
    line_a = [[x / 10.0, 0.0] for x in range(10)]
    line_b = [[x / 10.0, 0.1] for x in range(10)]
    approx(tk.frechet(line_a, line_b), 0.1)
    assert tk.frechet(line_a, line_b) >= tk.hausdorff(line_a, line_b) - 1e-12

    # Isolation model basics: self-similarity and kernel range.
    points = [[i / 50.0, (i * 7 % 13) / 13.0] for i in range(50)]
    ik = tk.IsolationModel(points, psi=8, t=100, seed=1)
    approx(ik.point_kernel([0.3, 0.4], [0.3, 0.4]), 1.0)
    k = ik.kernel(line_a, line_b)
    assert 0.0 <= k <= 1.0
    assert ik.feature_dim() == 8 * 100

    # Gaussian model agrees with the exact kernel when components = points.
    distinct = [[i / 9.0, (i * 3 % 7) / 7.0] for i in range(9)]
    ng = tk.NystromGaussianModel(distinct, components=9, sigma=0.5, seed=2)
    e = ng.embed_point(distinct[0])
    approx(sum(v * v for v in e), 1.0, tol=1e-6)

    # Detection pipeline: the far singleton ranks first with AUC 1.
    ds = tk.gen_separable_singleton(12, 3)
    ranking = tk.rank_anomalies(ds, scheme="ik", detector="idk2", psi=8, seed=5)
    assert ranking[0][0] == "anom", ranking[:3]
    auc = tk.roc_auc(ranking, ds.labels(), polarity="similarity")
    approx(auc, 1.0)

    # The dense/sparse dataset: 103 trajectories, 3 labeled anomalies.
    fig = tk.gen_dense_sparse(7)
    assert len(fig) == 103
    anomalies = sorted(k for k, v in fig.labels().items() if v == 1)
    assert anomalies == ["40", "51", "52"], anomalies

    # Sub-trajectory detection on a synthetic detour.
    normals = tk.Dataset.from_records(
        [
            (f"n{i}", [[x / 30.0, 0.01 * i] for x in range(30)])
            for i in range(10)
        ]
    )
    query = [[x / 30.0, 0.8 if 10 <= x < 20 else 0.05] for x in range(30)]
    spans, beta = tk.detect_subtrajectories(normals, query, psi=64, t=100, tau=0.018, seed=3)
    assert len(beta) == 30
    assert any(a <= 11 and b >= 20 and (b - a) < 25 for a, b in spans), spans

    # Pattern mining over a clustered crossing dataset.
    cross = tk.gen_cross_style(95, 4, anomaly_fraction=0.0)
    patterns = tk.mine_patterns(cross, psi=16, t=100, gamma=0.01, seed=6)
    assert len(patterns) == 19
    assert all(spans for (_, _, spans, _) in patterns)
    lengths = [l for (_, _, _, ls) in patterns for l in ls]
    assert all(l >= 0.0 and math.isfinite(l) for l in lengths)

    # Dataset round trip through CSV.
    with tempfile.TemporaryDirectory() as tmp:
        path = str(Path(tmp) / "ds.csv")
        cross.write(path)
        back = tk.Dataset.read(path)
        assert back.ids() == cross.ids()
        assert back.points(back.ids()[0]) == cross.points(cross.ids()[0])

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
