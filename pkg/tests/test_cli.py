import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from multiclipper.cli import (
    EXIT_CONFIG,
    EXIT_EMPTY,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_SOLVER,
    ExperimentConfig,
    job_seed,
    main,
)
from multiclipper.oracle import binarize, enumerate_maximal_cliques
from multiclipper.association import build_affinity
from multiclipper.registration import Pose, PoseDistribution
from multiclipper.scenes import SceneSpec, generate

FAST = ["--particles", "60", "--iters", "150", "--ransac-trials", "5000", "--ransac-keep", "300"]


def run(tmp_path, *args, out="out"):
    return main([*args, "--out-dir", str(tmp_path / out), "--cache-dir", str(tmp_path / "cache")])


def test_run_langevin_circle(tmp_path, capsys):
    code = run(tmp_path, "run", "--scene", "circle", "--repetitions", "3", *FAST)
    assert code == EXIT_OK
    out = tmp_path / "out"
    for name in ("report.json", "timing.json", "distribution.json", "distribution.csv",
                 "hist_x.csv", "hist_y.csv", "hist_z.csv", "hist_yaw.csv"):
        assert (out / name).exists(), name
    rep = json.loads((out / "report.json").read_text())
    assert len(rep["repetitions"]) == 3
    stats = rep["metrics_vs_reference"]
    assert set(stats) == {f"{m}_{c}" for m in ("mmd", "ed", "w1") for c in ("trans", "rot")}
    assert all(np.isfinite(v["mean"]) and np.isfinite(v["std"]) for v in stats.values())
    assert "wall_time" not in json.dumps(rep)
    assert rep["histograms"]["yaw"]["bin_width"] == 5.0
    printed = capsys.readouterr().out
    # human-readable values are scaled by 10^2; JSON keeps raw values
    w1 = stats["w1_rot"]["mean"]
    assert f"{w1 * 100:10.4f}" in printed


def test_hist_yaw_bins(tmp_path):
    run(tmp_path, "run", "--scene", "circle", "--repetitions", "1", *FAST)
    with open(tmp_path / "out" / "hist_yaw.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 72
    assert float(rows[0]["bin_lo"]) == -180 and float(rows[-1]["bin_hi"]) == 180
    total = sum(int(r["multiplicity"]) for r in rows)
    d = PoseDistribution.load(tmp_path / "out" / "distribution.csv")
    assert total == d.total


def test_run_is_byte_identical_and_worker_independent(tmp_path):
    args = ["run", "--scene", "triangle_toy", "--repetitions", "3", "--seed", "7", *FAST]
    assert run(tmp_path, *args, out="a") == EXIT_OK
    assert run(tmp_path, *args, out="b") == EXIT_OK
    assert run(tmp_path, *args, "--jobs", "2", out="c") == EXIT_OK
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()
    assert a == (tmp_path / "c" / "report.json").read_bytes()
    assert (tmp_path / "a" / "distribution.json").read_bytes() == (tmp_path / "c" / "distribution.json").read_bytes()


def test_run_oracle_bk_triangle(tmp_path):
    assert run(tmp_path, "run", "--solver", "oracle_bk", "--scene", "triangle_toy") == EXIT_OK
    got = json.loads((tmp_path / "out" / "cliques.json").read_text())
    sc = generate(SceneSpec(kind="triangle_toy"))
    want = enumerate_maximal_cliques(binarize(build_affinity(sc.S, sc.T, sc.candidates(), 0.4, 0.6)))
    assert got == [list(c.indices) for c in want]


def test_run_ransac_ref(tmp_path):
    code = run(tmp_path, "run", "--solver", "ransac_ref", "--scene", "circle", "--ransac-trials", "4000",
               "--ransac-keep", "200")
    assert code == EXIT_OK
    d = PoseDistribution.load(tmp_path / "out" / "distribution.json")
    assert 0 < d.total <= 200
    cached = list((tmp_path / "cache").glob("ref_*.npz"))
    assert len(cached) == 1
    # a second call is served from the cache file
    with np.load(cached[0]) as z:
        np.savez(cached[0], **{k: z[k][:1] for k in z.files})
    assert run(tmp_path, "run", "--solver", "ransac_ref", "--scene", "circle", "--ransac-trials", "4000",
               "--ransac-keep", "200", out="again") == EXIT_OK
    assert len(PoseDistribution.load(tmp_path / "again" / "distribution.json")) == 1


def test_missing_scene_file(tmp_path, capsys):
    missing = tmp_path / "nope" / "scene.json"
    assert run(tmp_path, "run", "--scene", str(missing)) == EXIT_INPUT
    assert str(missing) in capsys.readouterr().err


def test_config_file_and_errors(tmp_path, capsys):
    cfg = {"scene": {"kind": "triangle_toy"}, "solver": "oracle_bk"}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    assert run(tmp_path, "run", "--config", str(p)) == EXIT_OK
    p.write_text(json.dumps({"solver": "magic"}))
    assert run(tmp_path, "run", "--config", str(p)) == EXIT_CONFIG
    p.write_text(json.dumps({"bogus_key": 1}))
    assert run(tmp_path, "run", "--config", str(p)) == EXIT_CONFIG
    p.write_text("{not json")
    assert run(tmp_path, "run", "--config", str(p)) == EXIT_CONFIG
    assert run(tmp_path, "run", "--config", str(tmp_path / "missing.json")) == EXIT_INPUT
    assert run(tmp_path, "run", "--repetitions", "0") == EXIT_CONFIG


def test_oracle_too_large_is_solver_error(tmp_path):
    assert run(tmp_path, "run", "--solver", "oracle_bk", "--scene", "two_lines") == EXIT_SOLVER


def test_empty_distribution_exit(tmp_path):
    code = run(tmp_path, "run", "--solver", "stein", "--scene", "circle", "--particles", "3", "--iters", "5",
               "--repetitions", "1", "--metrics", "")
    assert code == EXIT_EMPTY


def _write_dist(path, *translations):
    PoseDistribution([Pose(np.eye(3), t) for t in translations], [1] * len(translations)).save_json(path)


def test_compare(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    _write_dist(a, (0, 0, 0))
    _write_dist(b, (1, 0, 0))
    assert main(["compare", str(a), str(a), "--out-dir", str(tmp_path / "c1")]) == EXIT_OK
    recs = json.loads((tmp_path / "c1" / "compare.json").read_text())["metrics"]
    assert all(r["value"] == 0 for r in recs)
    assert main(["compare", str(a), str(b), "--out-dir", str(tmp_path / "c2")]) == EXIT_OK
    recs = json.loads((tmp_path / "c2" / "compare.json").read_text())["metrics"]
    w1 = next(r for r in recs if r["metric"] == "W1" and r["component"] == "trans")
    assert w1["value"] == pytest.approx(1.0)
    assert "100.0000" in capsys.readouterr().out
    assert main(["compare", str(a), str(tmp_path / "x.json"), "--out-dir", str(tmp_path)]) == EXIT_INPUT
    (tmp_path / "bad.json").write_text("[{}]")
    assert main(["compare", str(a), str(tmp_path / "bad.json"), "--out-dir", str(tmp_path)]) == EXIT_INPUT


def test_ablate_grid(tmp_path):
    code = run(tmp_path, "ablate", "--scene", "circle", "--grid", "n_particles=30,60",
               "--grid", "step_size=0.5,1.0", "--repetitions", "2", "--iters", "100",
               "--ransac-trials", "4000", "--ransac-keep", "200")
    assert code == EXIT_OK
    with open(tmp_path / "out" / "ablation.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 8
    assert sum(r["rep"] == "0" for r in rows) == 4
    assert {(r["n_particles"], r["step_size"]) for r in rows} == {("30", "0.5"), ("30", "1.0"), ("60", "0.5"), ("60", "1.0")}
    assert all(r["status"] == "ok" and r["w1_rot"] and r["runtime"] for r in rows)


def test_ablate_flags_failed_cells(tmp_path):
    code = run(tmp_path, "ablate", "--scene", "circle", "--solver", "stein", "--grid", "kernel_bandwidth=0.005",
               "--grid", "step_size=0.000001,0.3", "--particles", "20", "--iters", "200", "--repetitions", "1",
               "--ransac-trials", "4000", "--ransac-keep", "200")
    assert code == EXIT_OK
    with open(tmp_path / "out" / "ablation.csv") as f:
        rows = {r["step_size"]: r for r in csv.DictReader(f)}
    assert rows["1e-06"]["status"] == "failed"
    assert rows["0.3"]["status"] == "ok"
    assert all(r["kernel_bandwidth"] == "0.005" for r in rows.values())


def test_ablate_needs_grid(tmp_path):
    assert run(tmp_path, "ablate", "--scene", "circle") == EXIT_CONFIG
    assert run(tmp_path, "ablate", "--grid", "sigma=1,2") == EXIT_CONFIG


def test_gen_scene_then_run_from_file(tmp_path):
    assert run(tmp_path, "gen-scene", "--scene", "triangle_toy", "--noise", "0.0", "--stem", "tri") == EXIT_OK
    path = tmp_path / "out" / "tri_S.json"
    assert path.exists() and (tmp_path / "out" / "tri_S.json.meta.json").exists()
    assert run(tmp_path, "run", "--scene", str(path), "--solver", "oracle_bk", out="o2") == EXIT_OK


def test_oracle_verb(tmp_path, capsys):
    assert run(tmp_path, "oracle", "--scene", "triangle_toy") == EXIT_OK
    cl = tmp_path / "out" / "cliques.json"
    assert run(tmp_path, "oracle", "--scene", "triangle_toy", "--cliques", str(cl), out="o2") == EXIT_OK
    rep = json.loads((tmp_path / "o2" / "oracle.json").read_text())
    assert rep["coverage"]["hit_rate"] == 1.0
    m = np.eye(4)
    m[0, 1] = m[1, 0] = 0.9
    np.save(tmp_path / "m.npy", m)
    assert run(tmp_path, "oracle", "--matrix", str(tmp_path / "m.npy"), out="o3") == EXIT_OK
    got = json.loads((tmp_path / "o3" / "cliques.json").read_text())
    assert got == [[0, 1], [2], [3]]
    assert run(tmp_path, "oracle", "--matrix", str(tmp_path / "none.npy")) == EXIT_INPUT


def test_job_seeds_distinct():
    seeds = {job_seed(0, i) for i in range(100)}
    assert len(seeds) == 100
    assert job_seed(3, 5) == job_seed(3, 5)


def test_experiment_config_roundtrip():
    cfg = ExperimentConfig(scene={"kind": "two_lines", "spacing": 1.0}, solver="stein", repetitions=2)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == ExperimentConfig.from_dict(cfg.to_dict())
    assert cfg.scene_spec().spacing == 1.0


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "multiclipper", "oracle", "--scene", "triangle_toy",
                        "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0
    assert (tmp_path / "cliques.json").exists()
