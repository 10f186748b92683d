"""Synthetic ambiguous scenes with known symmetry groups."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.spatial.transform import Rotation

from multiclipper.association import Association, PointSet, all_pairs_candidates
from multiclipper.registration import Pose

KINDS = ("circle", "two_lines", "repeated_clusters", "triangle_toy", "from_file")

# chair, desk, keyboard, monitor centroids in a workstation frame facing -y
WORKSTATION = np.array(
    [
        [0.0, -0.7, 0.45],
        [0.0, 0.0, 0.75],
        [0.15, -0.25, 0.78],
        [-0.1, 0.3, 1.05],
    ]
)
# (x, y, yaw in degrees) of the stations in one U-shaped pod
U_LAYOUT = [
    (-2.5, 0.0, 90.0),
    (-2.5, 1.8, 90.0),
    (-0.9, 3.3, 180.0),
    (0.9, 3.3, 180.0),
    (2.5, 1.8, 270.0),
    (2.5, 0.0, 270.0),
]


@dataclass
class SceneSpec:
    kind: str = "circle"
    n_points: int = 8
    radius: float = 5.0
    points_per_line: int = 8
    spacing: float = 2.0
    line_separation: float = 3.0
    clusters_per_pod: int = 6
    pods: int = 2
    pod_offset: float = 8.0
    noise_sigma: float = 0.0
    applied_pose: Pose | None = None
    random_pose: bool = False
    seed: int = 0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scene kind {self.kind!r}")
        for name in ("radius", "spacing", "line_separation", "pod_offset"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.kind == "circle" and self.n_points < 3:
            raise ValueError("circle needs at least 3 points")
        if self.kind == "two_lines" and self.points_per_line < 2:
            raise ValueError("two_lines needs at least 2 points per line")
        if self.kind == "repeated_clusters" and not 1 <= self.clusters_per_pod <= len(U_LAYOUT):
            raise ValueError(f"clusters_per_pod must lie in 1..{len(U_LAYOUT)}")
        if self.kind == "repeated_clusters" and self.pods < 1:
            raise ValueError("pods must be >= 1")
        if self.kind == "from_file" and not self.path:
            raise ValueError("from_file scenes need a path")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["applied_pose"] = _pose_record(self.applied_pose) if self.applied_pose is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SceneSpec":
        d = dict(d)
        if d.get("applied_pose") is not None:
            d["applied_pose"] = _pose_from_record(d["applied_pose"])
        return cls(**d)


class Scene(NamedTuple):
    S: PointSet
    T: PointSet
    true_pose: Pose
    symmetry_group: list
    labels: np.ndarray | None = None  # per-point class ids, shared by S and T

    def candidates(self) -> list[Association]:
        """All-pairs associations, restricted to equal labels when the scene has them."""
        if self.labels is None:
            return all_pairs_candidates(self.S, self.T)
        lab = self.labels
        return [Association(i, j) for i in range(len(lab)) for j in range(len(lab)) if lab[i] == lab[j]]


def _about(center, R) -> Pose:
    c = np.asarray(center, dtype=float)
    return Pose(R, c - R @ c)


def _circle(spec: SceneSpec):
    ang = 2 * np.pi * np.arange(spec.n_points) / spec.n_points
    pts = np.stack([spec.radius * np.cos(ang), spec.radius * np.sin(ang), np.zeros_like(ang)], axis=1)
    flip = Rotation.from_euler("x", 180, degrees=True).as_matrix()
    group = []
    for k in range(spec.n_points):
        rz = Rotation.from_euler("z", 360.0 * k / spec.n_points, degrees=True).as_matrix()
        group.append(Pose(rz))
        group.append(Pose(rz @ flip))
    return pts, group


def _two_lines(spec: SceneSpec):
    m, s, w = spec.points_per_line, spec.spacing, spec.line_separation
    x = s * np.arange(m)
    pts = np.vstack([np.stack([x, np.zeros(m), np.zeros(m)], 1), np.stack([x, np.full(m, w), np.zeros(m)], 1)])
    center = np.array([s * (m - 1) / 2.0, w / 2.0, 0.0])
    flips = [np.eye(3)] + [Rotation.from_euler(ax, 180, degrees=True).as_matrix() for ax in "xyz"]
    group = []
    # shifts keep at least two points of each line overlapping
    for k in range(-(m - 2), m - 1):
        shift = Pose(np.eye(3), (k * s, 0.0, 0.0))
        group.extend(shift.compose(_about(center, R)) for R in flips)
    return pts, group


def _station_poses(spec: SceneSpec) -> list[Pose]:
    poses = []
    for p in range(spec.pods):
        for x, y, yaw in U_LAYOUT[: spec.clusters_per_pod]:
            poses.append(Pose.from_yaw(yaw, (x + p * spec.pod_offset, y, 0.0)))
    return poses


def _repeated_clusters(spec: SceneSpec):
    stations = _station_poses(spec)
    pts = np.vstack([st.apply(WORKSTATION) for st in stations])
    labels = np.tile(np.arange(len(WORKSTATION)), len(stations))
    group: list[Pose] = []
    for a in stations:
        for b in stations:
            g = b.compose(a.inverse())
            if not any(g.is_close(h, 1e-9) for h in group):
                group.append(g)
    return pts, group, labels


def _triangle(spec: SceneSpec):
    pts = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 3.0, 0.0]])
    mirror = _about([1.0, 0.0, 0.0], Rotation.from_euler("y", 180, degrees=True).as_matrix())
    return pts, [Pose(), mirror]


def _from_file(spec: SceneSpec):
    ps = PointSet.load(spec.path)
    side = Path(str(spec.path) + ".meta.json")
    group, labels = [Pose()], None
    if side.exists():
        meta = json.loads(side.read_text())
        group = [_pose_from_record(r) for r in meta.get("symmetry_group", [])] or group
        if meta.get("labels") is not None:
            labels = np.asarray(meta["labels"], dtype=np.int64)
    return ps.points.copy(), group, labels


_BUILDERS = {
    "circle": _circle,
    "two_lines": _two_lines,
    "repeated_clusters": _repeated_clusters,
    "triangle_toy": _triangle,
    "from_file": _from_file,
}


def random_pose(rng: np.random.Generator, extent: float = 2.0) -> Pose:
    R = Rotation.random(random_state=rng).as_matrix()
    return Pose(R, rng.uniform(-extent, extent, 3))


def generate(spec: SceneSpec) -> Scene:
    """Canonical scene S, its noisy transformed copy T, and the self-congruences of S."""
    pts, group, *rest = _BUILDERS[spec.kind](spec)
    labels = rest[0] if rest else None
    rng = np.random.default_rng(spec.seed)
    if spec.applied_pose is not None:
        pose = spec.applied_pose
    elif spec.random_pose:
        pose = random_pose(rng)
    else:
        pose = Pose()
    tpts = pose.apply(pts)
    if spec.noise_sigma > 0:
        tpts = tpts + rng.normal(0.0, spec.noise_sigma, tpts.shape)
    return Scene(PointSet(pts, "source"), PointSet(tpts, "target"), pose, group, labels)


def subset(S: PointSet, indices) -> PointSet:
    idx = np.asarray(list(indices), dtype=np.int64)
    if idx.size and (idx.min() < -len(S) or idx.max() >= len(S)):
        raise IndexError("subset index out of range")
    if idx.size and idx.min() < 0:
        raise IndexError("negative subset indices are not allowed")
    return PointSet(S.points[idx].reshape(-1, 3), S.frame_id)


def _pose_record(p: Pose) -> dict:
    return {"quaternion": p.quaternion().tolist(), "translation": p.translation.tolist()}


def _pose_from_record(r) -> Pose:
    return Pose.from_quaternion(r["quaternion"], r["translation"])


def save_scene(scene: Scene, directory, stem: str = "scene") -> tuple[Path, Path]:
    """Write S and T as point-set JSON; the S file gets the sidecar with pose metadata."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    ps, pt = d / f"{stem}_S.json", d / f"{stem}_T.json"
    scene.S.save(ps)
    scene.T.save(pt)
    meta = {
        "true_pose": _pose_record(scene.true_pose),
        "symmetry_group": [_pose_record(g) for g in scene.symmetry_group],
        "labels": None if scene.labels is None else [int(x) for x in scene.labels],
    }
    Path(str(ps) + ".meta.json").write_text(json.dumps(meta))
    return ps, pt


def yaw_mode_distance(yaw_deg, period: float) -> np.ndarray:
    """Angular distance (degrees) from each yaw to the nearest multiple of ``period``."""
    r = np.mod(np.asarray(yaw_deg, dtype=float), period)
    return np.minimum(r, period - r)


def circle_period(spec: SceneSpec) -> float:
    return 360.0 / spec.n_points
