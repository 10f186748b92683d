"""Command-line harness: scenes -> affinity -> solvers -> pose distributions -> metrics.

Verbs: run, compare, ablate, gen-scene, oracle.  Every verb takes --config
(a JSON file whose keys mirror ExperimentConfig), --seed, --out-dir and --jobs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import itertools
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from multiclipper.association import AffinityMatrix, build_affinity
from multiclipper.metrics import EmptyDistributionError, GroundMetric, metric_report
from multiclipper.oracle import (
    GraphTooLargeError,
    binarize,
    coverage_report,
    enumerate_maximal_cliques,
    load_cliques,
    save_cliques,
)
from multiclipper.registration import Pose, PoseDistribution, cliques_to_distribution, ransac_reference_distribution
from multiclipper.scenes import SceneSpec, generate, save_scene
from multiclipper.solvers import SolverConfig, run_baseline_clipper, run_langevin_clipper, run_stein_clipper

log = logging.getLogger("multiclipper")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_SOLVER = 4
EXIT_EMPTY = 5

SOLVERS = ("baseline", "stein", "langevin", "oracle_bk", "ransac_ref")
PARTICLE_SOLVERS = {"baseline": run_baseline_clipper, "stein": run_stein_clipper, "langevin": run_langevin_clipper}
ABLATION_PARAMS = ("n_particles", "step_size", "kernel_bandwidth")
SCALE = 100.0  # human-readable metric scaling


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class ExperimentConfig:
    scene: dict = field(default_factory=lambda: {"kind": "circle"})
    solver: str = "langevin"
    solver_config: dict = field(default_factory=dict)
    sigma: float = 0.4
    epsilon: float = 0.6
    metrics: list = field(default_factory=lambda: ["mmd", "ed", "w1"])
    mmd_bandwidth: object = "median"
    repetitions: int = 10
    seed: int = 0
    ransac: dict = field(default_factory=dict)
    hist_yaw_bin: float = 5.0
    hist_trans_bin: float = 0.25
    grid: dict = field(default_factory=dict)
    cache_dir: str | None = None

    def __post_init__(self):
        if isinstance(self.scene, str):
            self.scene = {"kind": "from_file", "path": self.scene}
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {', '.join(SOLVERS)}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.sigma <= 0 or self.epsilon <= 0:
            raise ValueError("sigma and epsilon must be positive")
        unknown = set(self.metrics) - {"mmd", "ed", "w1"}
        if unknown:
            raise ValueError(f"unknown metrics {sorted(unknown)}")
        bad = set(self.grid) - set(ABLATION_PARAMS)
        if bad:
            raise ValueError(f"grid may only vary {', '.join(ABLATION_PARAMS)}; got {sorted(bad)}")
        path = self.scene.get("path")
        if self.scene.get("kind") == "from_file" and path and not Path(path).exists():
            raise CliError(f"scene file not found: {path}", EXIT_INPUT)
        # fail early on bad fields
        self.scene_spec()
        self.solver_cfg(self.seed)

    def scene_spec(self) -> SceneSpec:
        return SceneSpec.from_dict(self.scene)

    def solver_cfg(self, seed: int, **overrides) -> SolverConfig:
        d = {**self.solver_config, **overrides, "seed": int(seed)}
        return SolverConfig(**d)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("cache_dir")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - names
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**d)


def job_seed(seed: int, index: int) -> int:
    """Seed for job ``index``; independent of how jobs are scheduled."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def _scene_and_affinity(cfg: ExperimentConfig):
    scene = generate(cfg.scene_spec())
    m = build_affinity(scene.S, scene.T, scene.candidates(), cfg.sigma, cfg.epsilon)
    return scene, m


def _hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def reference_distribution(cfg: ExperimentConfig, scene) -> PoseDistribution:
    """RANSAC reference for the scene, cached on disk by scene content and generator params."""
    params = {"seed": cfg.seed, **cfg.ransac}
    key = _hash({"S": scene.S.points.tolist(), "T": scene.T.points.tolist(), "params": params})
    cache = Path(cfg.cache_dir or os.environ.get("MULTICLIPPER_CACHE", Path.home() / ".cache" / "multiclipper"))
    path = cache / f"ref_{key}.npz"
    if path.exists():
        log.info("reference distribution from cache %s", path)
        with np.load(path) as z:
            return PoseDistribution([Pose(R, t) for R, t in zip(z["rotations"], z["translations"])],
                                    z["multiplicities"].tolist())
    ref = ransac_reference_distribution(scene.S, scene.T, **params)
    try:
        cache.mkdir(parents=True, exist_ok=True)
        # matrices, not quaternions: the quaternion round trip is not bit-exact
        np.savez(path, rotations=ref.rotations, translations=ref.translations,
                 multiplicities=np.asarray(ref.multiplicities, dtype=np.int64))
    except OSError as e:
        log.warning("could not write reference cache: %s", e)
    return ref


def _metric_values(a: PoseDistribution, b: PoseDistribution, cfg: ExperimentConfig) -> dict:
    recs = metric_report(a, b, cfg.metrics, cfg.mmd_bandwidth)
    return {f"{r['metric'].lower()}_{r['component']}": r["value"] for r in recs}


def _solve_job(args):
    """One repetition / grid cell.  Top level so worker processes can pickle it."""
    cfg_dict, index, overrides = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    scene, m = _scene_and_affinity(cfg)
    scfg = cfg.solver_cfg(job_seed(cfg.seed, index), **overrides)
    t0 = time.perf_counter()
    res = PARTICLE_SOLVERS[cfg.solver](m, scfg)
    dist = cliques_to_distribution(res.cliques, m, scene.S, scene.T)
    runtime = time.perf_counter() - t0
    report = res.report.to_dict(res.cliques)
    report.pop("timing")
    return {"index": index, "report": report, "distribution": dist.to_records(), "runtime": runtime}


def _map_jobs(jobs: list, n_workers: int) -> list:
    if n_workers <= 1 or len(jobs) <= 1:
        return [_solve_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_solve_job, jobs))


def _summary(values: list) -> dict:
    a = np.asarray(values, dtype=float)
    return {"mean": float(a.mean()), "std": float(a.std()), "n": int(a.size)}


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _bin_edges(lo: float, hi: float, width: float) -> np.ndarray:
    lo = np.floor(lo / width) * width
    hi = max(np.ceil(hi / width) * width, lo + width)
    return np.round(np.arange(lo, hi + width / 2, width), 10)


def write_histograms(dist: PoseDistribution, out: Path, yaw_bin: float, trans_bin: float) -> dict:
    """Per-axis multiplicity histograms (x, y, z, yaw); returns the declared bin edges."""
    declared = {}
    if len(dist) == 0:
        return declared
    t, w = dist.translations, np.asarray(dist.multiplicities, dtype=float)
    cols = {"x": t[:, 0], "y": t[:, 1], "z": t[:, 2], "yaw": dist.yaws}
    for axis, vals in cols.items():
        if axis == "yaw":
            edges = np.arange(-180.0, 180.0 + yaw_bin / 2, yaw_bin)
            vals = np.where(vals >= 180.0, vals - 360.0, vals)
        else:
            edges = _bin_edges(vals.min(), vals.max(), trans_bin)
        counts, _ = np.histogram(vals, bins=edges, weights=w)
        with open(out / f"hist_{axis}.csv", "w", newline="") as f:
            wr = csv.writer(f)
            wr.writerow(["bin_lo", "bin_hi", "multiplicity", "fraction"])
            for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                wr.writerow([f"{lo:.6g}", f"{hi:.6g}", int(round(c)), f"{c / w.sum():.6g}"])
        declared[axis] = {
            "unit": "deg" if axis == "yaw" else "m",
            "bin_width": yaw_bin if axis == "yaw" else trans_bin,
            "range": [float(edges[0]), float(edges[-1])],
        }
    return declared


def _print_metrics(title: str, values: dict, stds: dict | None = None) -> None:
    print(f"{title} (x10^2)")
    for k in sorted(values):
        s = f"  {k:<10s} {values[k] * SCALE:10.4f}"
        if stds is not None:
            s += f" +/- {stds[k] * SCALE:.4f}"
        print(s)


def cmd_run(cfg: ExperimentConfig, out: Path, n_workers: int = 1) -> int:
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    scene, m = _scene_and_affinity(cfg)
    report = {"config": cfg.to_dict(), "n_candidates": m.n}
    timing = {}

    if cfg.solver == "oracle_bk":
        try:
            cliques = enumerate_maximal_cliques(binarize(m))
        except GraphTooLargeError as e:
            raise CliError(str(e), EXIT_SOLVER) from e
        save_cliques(cliques, out / "cliques.json")
        dist = cliques_to_distribution(cliques, m, scene.S, scene.T)
        report["cliques"] = [list(c.indices) for c in cliques]
    elif cfg.solver == "ransac_ref":
        dist = reference_distribution(cfg, scene)
    else:
        jobs = [(cfg.to_dict(), r, {}) for r in range(cfg.repetitions)]
        results = sorted(_map_jobs(jobs, n_workers), key=lambda r: r["index"])
        dist = PoseDistribution()
        for r in results:
            part = PoseDistribution.from_records(r["distribution"])
            for p, k in zip(part.samples, part.multiplicities):
                dist.add(p, k)
        report["repetitions"] = [
            {"index": r["index"], "seed": job_seed(cfg.seed, r["index"]), "n_poses": len(r["distribution"]),
             "run": r["report"]}
            for r in results
        ]
        timing["repetitions"] = [r["runtime"] for r in results]
        if cfg.metrics:
            ref = reference_distribution(cfg, scene)
            if len(ref) == 0:
                raise CliError("reference distribution is empty", EXIT_EMPTY)
            per_rep = []
            for r, rec in zip(results, report["repetitions"]):
                part = PoseDistribution.from_records(r["distribution"])
                vals = _metric_values(part, ref, cfg) if len(part) else None
                rec["metrics"] = vals
                if vals:
                    per_rep.append(vals)
            if not per_rep:
                raise CliError("every repetition produced an empty pose distribution", EXIT_EMPTY)
            keys = sorted(per_rep[0])
            report["metrics_vs_reference"] = {k: _summary([v[k] for v in per_rep]) for k in keys}
            report["reference"] = {"n_poses": len(ref), "total": ref.total}
            _print_metrics(
                f"{cfg.solver} vs ransac_ref over {len(per_rep)} repetition(s)",
                {k: report["metrics_vs_reference"][k]["mean"] for k in keys},
                {k: report["metrics_vs_reference"][k]["std"] for k in keys},
            )

    if len(dist) == 0:
        raise CliError("pose distribution is empty", EXIT_EMPTY)
    dist.save_json(out / "distribution.json")
    dist.save_csv(out / "distribution.csv")
    report["distribution"] = {"n_poses": len(dist), "total": dist.total}
    report["histograms"] = write_histograms(dist, out, cfg.hist_yaw_bin, cfg.hist_trans_bin)
    _dump(out / "report.json", report)
    timing["total"] = time.perf_counter() - t0
    _dump(out / "timing.json", timing)
    print(f"wrote {out / 'report.json'} ({len(dist)} distinct poses, total multiplicity {dist.total})")
    return EXIT_OK


def cmd_compare(path_a, path_b, metrics, out: Path, bandwidth="median") -> int:
    dists = []
    for p in (path_a, path_b):
        if not Path(p).exists():
            raise CliError(f"distribution file not found: {p}", EXIT_INPUT)
        try:
            dists.append(PoseDistribution.load(p))
        except (ValueError, KeyError, json.JSONDecodeError) as e:
            raise CliError(f"could not parse {p}: {e}", EXIT_INPUT) from e
    try:
        recs = metric_report(dists[0], dists[1], metrics, bandwidth)
    except EmptyDistributionError as e:
        raise CliError(str(e), EXIT_EMPTY) from e
    out.mkdir(parents=True, exist_ok=True)
    _dump(out / "compare.json", {"a": str(path_a), "b": str(path_b), "metrics": recs})
    _print_metrics(f"{path_a} vs {path_b}", {f"{r['metric'].lower()}_{r['component']}": r["value"] for r in recs})
    return EXIT_OK


def cmd_ablate(cfg: ExperimentConfig, out: Path, n_workers: int = 1) -> int:
    if cfg.solver not in PARTICLE_SOLVERS:
        raise CliError("ablate needs a particle solver (baseline, stein or langevin)", EXIT_CONFIG)
    if not cfg.grid:
        raise CliError("ablate needs a non-empty grid", EXIT_CONFIG)
    out.mkdir(parents=True, exist_ok=True)
    names = sorted(cfg.grid)
    cells = list(itertools.product(*(cfg.grid[k] for k in names)))
    scene, _ = _scene_and_affinity(cfg)
    ref = reference_distribution(cfg, scene) if cfg.metrics else None
    jobs = []
    for rep in range(cfg.repetitions):
        for c, values in enumerate(cells):
            jobs.append((cfg.to_dict(), rep * len(cells) + c, dict(zip(names, values))))
    rows = []
    for (_, index, overrides), res in zip(jobs, _run_tolerant(jobs, n_workers)):
        row = {"rep": index // len(cells), **{k: overrides.get(k, "") for k in ABLATION_PARAMS}}
        if isinstance(res, Exception):
            row.update(status="failed", error=str(res), n_poses=0, runtime="")
        else:
            part = PoseDistribution.from_records(res["distribution"])
            row.update(status="ok" if len(part) else "failed", error="" if len(part) else "no solutions",
                       n_poses=len(part), runtime=f"{res['runtime']:.4f}")
            if len(part) and ref is not None and len(ref):
                row.update({k: repr(v) for k, v in _metric_values(part, ref, cfg).items()})
        rows.append(row)
    metric_cols = [f"{m}_{g.short}" for m in cfg.metrics for g in GroundMetric]
    cols = ["rep", *ABLATION_PARAMS, "status", "error", "n_poses", *metric_cols, "runtime"]
    with open(out / "ablation.csv", "w", newline="") as f:
        wr = csv.DictWriter(f, fieldnames=cols, restval="")
        wr.writeheader()
        wr.writerows(rows)
    failed = sum(r["status"] == "failed" for r in rows)
    print(f"wrote {out / 'ablation.csv'}: {len(rows)} rows, {failed} failed")
    return EXIT_OK


def _run_tolerant(jobs, n_workers):
    """Like _map_jobs, but a failing cell yields its exception instead of aborting the grid."""
    def guarded(j):
        try:
            return _solve_job(j)
        except (ValueError, FloatingPointError, np.linalg.LinAlgError) as e:
            return e

    if n_workers <= 1:
        return [guarded(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        futs = [pool.submit(_solve_job, j) for j in jobs]
        results = []
        for fu in futs:
            try:
                results.append(fu.result())
            except (ValueError, FloatingPointError, np.linalg.LinAlgError) as e:
                results.append(e)
        return results


def cmd_gen_scene(cfg: ExperimentConfig, out: Path, stem: str = "scene") -> int:
    scene = generate(cfg.scene_spec())
    ps, pt = save_scene(scene, out, stem)
    print(f"wrote {ps} and {pt}")
    return EXIT_OK


def _load_matrix(path) -> AffinityMatrix:
    p = Path(path)
    if not p.exists():
        raise CliError(f"matrix file not found: {p}", EXIT_INPUT)
    try:
        arr = np.load(p) if p.suffix == ".npy" else np.asarray(json.loads(p.read_text()), dtype=float)
        return AffinityMatrix.from_matrix(arr)
    except (ValueError, json.JSONDecodeError) as e:
        raise CliError(f"could not parse {p}: {e}", EXIT_INPUT) from e


def cmd_oracle(cfg: ExperimentConfig, out: Path, matrix=None, cliques_path=None, threshold=0.5, cap=64) -> int:
    out.mkdir(parents=True, exist_ok=True)
    m = _load_matrix(matrix) if matrix else _scene_and_affinity(cfg)[1]
    try:
        oracle = enumerate_maximal_cliques(binarize(m, threshold), cap)
    except GraphTooLargeError as e:
        raise CliError(str(e), EXIT_SOLVER) from e
    save_cliques(oracle, out / "cliques.json")
    report = {"n": m.n, "threshold": threshold, "cliques": [list(c.indices) for c in oracle]}
    if cliques_path:
        if not Path(cliques_path).exists():
            raise CliError(f"clique file not found: {cliques_path}", EXIT_INPUT)
        cov = coverage_report(load_cliques(cliques_path), oracle, min_size=2)
        report["coverage"] = cov.to_dict()
        print(f"hit rate {cov.hit_rate:.3f}, partial {cov.partial_rate:.3f}, spurious {cov.spurious_rate:.3f}")
    _dump(out / "oracle.json", report)
    print(f"{len(oracle)} maximal cliques written to {out / 'cliques.json'}")
    return EXIT_OK


def _kv(s: str):
    k, sep, v = s.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {s!r}")
    try:
        return k, json.loads(v)
    except json.JSONDecodeError:
        return k, v


def _grid_item(s: str):
    k, v = _kv(s)
    vals = v if isinstance(v, list) else [json.loads(x) for x in str(v).split(",")]
    return k, vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig fields")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", default="out")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    exp = argparse.ArgumentParser(add_help=False)
    exp.add_argument("--scene", help="scene kind, or a path to a point-set JSON file")
    exp.add_argument("--scene-param", type=_kv, action="append", default=[], metavar="KEY=VALUE")
    exp.add_argument("--noise", type=float, help="scene noise sigma (m)")
    exp.add_argument("--solver", choices=SOLVERS)
    exp.add_argument("--particles", type=int)
    exp.add_argument("--iters", type=int)
    exp.add_argument("--step-size", type=float)
    exp.add_argument("--kernel-bandwidth", type=float)
    exp.add_argument("--noise-mode", choices=["paper_2sqrt", "standard_sqrt2"])
    exp.add_argument("--adagrad", choices=["cumulative", "decayed"])
    exp.add_argument("--sigma", type=float)
    exp.add_argument("--epsilon", type=float)
    exp.add_argument("--metrics", help="comma-separated subset of mmd,ed,w1 (empty for none)")
    exp.add_argument("--repetitions", type=int)
    exp.add_argument("--ransac-trials", type=int)
    exp.add_argument("--ransac-keep", type=int)
    exp.add_argument("--cache-dir")

    p = argparse.ArgumentParser(prog="multiclipper", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)
    sub.add_parser("run", parents=[common, exp], help="run one solver over repetitions")
    c = sub.add_parser("compare", parents=[common], help="metric report between two distributions")
    c.add_argument("dist_a")
    c.add_argument("dist_b")
    c.add_argument("--metrics", default="mmd,ed,w1")
    c.add_argument("--mmd-bandwidth", default="median")
    a = sub.add_parser("ablate", parents=[common, exp], help="grid over solver parameters")
    a.add_argument("--grid", type=_grid_item, action="append", default=[], metavar="PARAM=V1,V2,...")
    g = sub.add_parser("gen-scene", parents=[common, exp], help="write a scene to disk")
    g.add_argument("--stem", default="scene")
    o = sub.add_parser("oracle", parents=[common, exp], help="Bron-Kerbosch maximal cliques")
    o.add_argument("--matrix", help="affinity matrix (.npy or JSON) instead of a scene")
    o.add_argument("--cliques", help="extracted cliques JSON to score against the oracle")
    o.add_argument("--threshold", type=float, default=0.5)
    o.add_argument("--cap", type=int, default=64)
    return p


def config_from_args(args) -> ExperimentConfig:
    d: dict = {}
    if args.config:
        p = Path(args.config)
        if not p.exists():
            raise CliError(f"config file not found: {p}", EXIT_INPUT)
        try:
            d = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise CliError(f"could not parse config {p}: {e}", EXIT_CONFIG) from e
    scene = d.get("scene", {"kind": "circle"})
    scene = {"kind": "from_file", "path": scene} if isinstance(scene, str) else dict(scene)
    if getattr(args, "scene", None):
        if Path(args.scene).suffix == ".json" or os.sep in args.scene:
            scene = {"kind": "from_file", "path": args.scene}
        else:
            scene = {"kind": args.scene}
    for k, v in getattr(args, "scene_param", []):
        scene[k] = v
    if getattr(args, "noise", None) is not None:
        scene["noise_sigma"] = args.noise
    d["scene"] = scene
    sc = dict(d.get("solver_config", {}))
    for flag, key in [("particles", "n_particles"), ("iters", "max_inner_iters"), ("step_size", "step_size"),
                      ("kernel_bandwidth", "kernel_bandwidth"), ("noise_mode", "noise_scale_mode"),
                      ("adagrad", "adagrad")]:
        if getattr(args, flag, None) is not None:
            sc[key] = getattr(args, flag)
    d["solver_config"] = sc
    for flag in ("solver", "sigma", "epsilon", "repetitions", "seed", "cache_dir"):
        if getattr(args, flag, None) is not None:
            d[flag] = getattr(args, flag)
    if getattr(args, "metrics", None) is not None:
        d["metrics"] = [x for x in args.metrics.split(",") if x]
    rs = dict(d.get("ransac", {}))
    if getattr(args, "ransac_trials", None) is not None:
        rs["n_trials"] = args.ransac_trials
    if getattr(args, "ransac_keep", None) is not None:
        rs["max_keep"] = args.ransac_keep
    d["ransac"] = rs
    if getattr(args, "grid", None):
        d["grid"] = dict(args.grid)
    try:
        return ExperimentConfig.from_dict(d)
    except (TypeError, ValueError) as e:
        raise CliError(f"invalid config: {e}", EXIT_CONFIG) from e


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out = Path(args.out_dir)
    try:
        if args.verb == "compare":
            bw = args.mmd_bandwidth if args.mmd_bandwidth == "median" else float(args.mmd_bandwidth)
            metrics = [x for x in args.metrics.split(",") if x]
            return cmd_compare(args.dist_a, args.dist_b, metrics, out, bw)
        cfg = config_from_args(args)
        if args.verb == "run":
            return cmd_run(cfg, out, args.jobs)
        if args.verb == "ablate":
            return cmd_ablate(cfg, out, args.jobs)
        if args.verb == "gen-scene":
            return cmd_gen_scene(cfg, out, args.stem)
        return cmd_oracle(cfg, out, args.matrix, args.cliques, args.threshold, args.cap)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except FileNotFoundError as e:
        print(f"error: file not found: {e.filename}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, np.linalg.LinAlgError) as e:
        print(f"error: solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
