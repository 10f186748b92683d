"""Rigid registration: cliques to SE(3) poses, ICP, and RANSAC reference distributions."""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.transform import Rotation

from multiclipper.association import AffinityMatrix, PointSet

log = logging.getLogger(__name__)

MERGE_TOL = 1e-6


class RegistrationError(ValueError):
    pass


class UnderdeterminedError(RegistrationError):
    pass


class DegenerateGeometryError(RegistrationError):
    pass


@dataclass(frozen=True)
class Pose:
    """Rigid transform ``x -> rotation @ x + translation``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.array(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.array(self.translation, dtype=np.float64).reshape(3)
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-9, rtol=0) or abs(np.linalg.det(R) - 1) > 1e-9:
            raise ValueError("rotation must be orthonormal with det +1")
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls()

    @classmethod
    def from_yaw(cls, degrees: float, translation=(0.0, 0.0, 0.0)) -> "Pose":
        return cls(Rotation.from_euler("z", degrees, degrees=True).as_matrix(), translation)

    @classmethod
    def from_quaternion(cls, wxyz, translation) -> "Pose":
        return cls(Rotation.from_quat(np.asarray(wxyz, dtype=float), scalar_first=True).as_matrix(), translation)

    def apply(self, points) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation

    def compose(self, other: "Pose") -> "Pose":
        """``self * other``: apply ``other`` first."""
        return Pose(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)

    def inverse(self) -> "Pose":
        return Pose(self.rotation.T, -self.rotation.T @ self.translation)

    def quaternion(self) -> np.ndarray:
        return Rotation.from_matrix(self.rotation).as_quat(scalar_first=True)

    @property
    def yaw(self) -> float:
        """Rotation about +z in degrees, in (-180, 180]."""
        return math.degrees(math.atan2(self.rotation[1, 0], self.rotation[0, 0]))

    def distance(self, other: "Pose") -> tuple[float, float]:
        """(translation distance, chordal rotation distance)."""
        return (
            float(np.linalg.norm(self.translation - other.translation)),
            float(np.linalg.norm(self.rotation - other.rotation)),
        )

    def is_close(self, other: "Pose", tol: float = MERGE_TOL) -> bool:
        dt, dr = self.distance(other)
        return dt <= tol and dr <= tol


@dataclass
class PoseDistribution:
    samples: list = field(default_factory=list)
    multiplicities: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.samples) != len(self.multiplicities):
            raise ValueError("samples and multiplicities differ in length")
        if any(int(k) < 1 for k in self.multiplicities):
            raise ValueError("multiplicities must be >= 1")
        self.multiplicities = [int(k) for k in self.multiplicities]

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def total(self) -> int:
        return int(sum(self.multiplicities))

    @property
    def weights(self) -> np.ndarray:
        w = np.asarray(self.multiplicities, dtype=np.float64)
        return w / w.sum()

    @property
    def rotations(self) -> np.ndarray:
        return np.array([p.rotation for p in self.samples]).reshape(-1, 3, 3)

    @property
    def translations(self) -> np.ndarray:
        return np.array([p.translation for p in self.samples]).reshape(-1, 3)

    @property
    def yaws(self) -> np.ndarray:
        return np.array([p.yaw for p in self.samples])

    def add(self, pose: Pose, count: int = 1, tol: float = MERGE_TOL) -> None:
        """Add ``count`` copies of ``pose``, merging into an existing sample within ``tol``."""
        for i, p in enumerate(self.samples):
            if p.is_close(pose, tol):
                self.multiplicities[i] += count
                return
        self.samples.append(pose)
        self.multiplicities.append(int(count))

    @classmethod
    def from_poses(cls, poses, counts=None, tol: float = MERGE_TOL) -> "PoseDistribution":
        """Pool poses greedily in input order; poses within ``tol`` of an
        earlier representative (translation and chordal) join it."""
        poses = list(poses)
        counts = [1] * len(poses) if counts is None else [int(k) for k in counts]
        if not poses:
            return cls()
        feats = np.hstack(
            [np.array([p.translation for p in poses]), np.array([p.rotation.ravel() for p in poses])]
        )
        tree = cKDTree(feats)
        owner = np.full(len(poses), -1)
        samples, mult = [], []
        for i, p in enumerate(poses):
            if owner[i] >= 0:
                continue
            owner[i] = len(samples)
            samples.append(p)
            mult.append(counts[i])
            for j in tree.query_ball_point(feats[i], r=tol * math.sqrt(2.0)):
                if owner[j] < 0 and p.is_close(poses[j], tol):
                    owner[j] = owner[i]
                    mult[-1] += counts[j]
        return cls(samples, mult)

    def to_records(self) -> list[dict]:
        return [
            {"quaternion": p.quaternion().tolist(), "translation": p.translation.tolist(), "multiplicity": k}
            for p, k in zip(self.samples, self.multiplicities)
        ]

    @classmethod
    def from_records(cls, records) -> "PoseDistribution":
        samples, mult = [], []
        for r in records:
            samples.append(Pose.from_quaternion(r["quaternion"], r["translation"]))
            mult.append(int(r["multiplicity"]))
        return cls(samples, mult)

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_records(), indent=1))

    @classmethod
    def load_json(cls, path) -> "PoseDistribution":
        return cls.from_records(json.loads(Path(path).read_text()))

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["qw", "qx", "qy", "qz", "tx", "ty", "tz", "mult"])
            for p, k in zip(self.samples, self.multiplicities):
                w.writerow([*(repr(float(v)) for v in p.quaternion()), *(repr(float(v)) for v in p.translation), k])

    @classmethod
    def load_csv(cls, path) -> "PoseDistribution":
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
        return cls.from_records(
            {
                "quaternion": [float(r[k]) for k in ("qw", "qx", "qy", "qz")],
                "translation": [float(r[k]) for k in ("tx", "ty", "tz")],
                "multiplicity": int(r["mult"]),
            }
            for r in rows
        )

    @classmethod
    def load(cls, path) -> "PoseDistribution":
        return cls.load_csv(path) if str(path).endswith(".csv") else cls.load_json(path)


def _kabsch(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched least-squares rotation/translation; inputs (..., k, 3)."""
    cs = src.mean(axis=-2, keepdims=True)
    cd = dst.mean(axis=-2, keepdims=True)
    H = np.swapaxes(src - cs, -1, -2) @ (dst - cd)
    U, _, Vt = np.linalg.svd(H)
    V = np.swapaxes(Vt, -1, -2)
    sign = np.sign(np.linalg.det(V @ np.swapaxes(U, -1, -2)))
    sign = np.where(sign == 0, 1.0, sign)
    D = np.zeros(H.shape)
    D[..., 0, 0] = 1.0
    D[..., 1, 1] = 1.0
    D[..., 2, 2] = sign
    R = V @ D @ np.swapaxes(U, -1, -2)
    t = cd[..., 0, :] - (R @ cs[..., 0, :, None])[..., 0]
    return R, t


def _is_degenerate(src: np.ndarray, rel_tol: float = 1e-8) -> bool:
    s = np.linalg.svd(src - src.mean(axis=0), compute_uv=False)
    return s[0] <= 1e-12 or s[1] <= rel_tol * s[0]


def fit_rigid_transform(source, target) -> Pose:
    """Least-squares rigid alignment mapping ``source`` rows onto ``target`` rows."""
    src = np.asarray(source, dtype=np.float64).reshape(-1, 3)
    dst = np.asarray(target, dtype=np.float64).reshape(-1, 3)
    if src.shape != dst.shape:
        raise ValueError("source and target must pair up")
    if len(src) < 3:
        raise UnderdeterminedError(f"need at least 3 pairs, got {len(src)}")
    if _is_degenerate(src):
        raise DegenerateGeometryError("source points are collinear or coincident")
    R, t = _kabsch(src, dst)
    return Pose(R, t)


def clique_to_pose(c, m: AffinityMatrix, S: PointSet, T: PointSet) -> Pose | None:
    """Pose implied by a clique's associations, or None when degenerate."""
    idx = list(c.indices)
    if len(idx) < 3:
        return None
    pairs = np.array([m.candidates[i] for i in idx])
    try:
        return fit_rigid_transform(S.points[pairs[:, 0]], T.points[pairs[:, 1]])
    except RegistrationError:
        return None


def cliques_to_distribution(cliques, m: AffinityMatrix, S: PointSet, T: PointSet, tol: float = MERGE_TOL) -> PoseDistribution:
    poses, mult = [], []
    for c, k in Counter(cliques).items():
        pose = clique_to_pose(c, m, S, T)
        if pose is not None:
            poses.append(pose)
            mult.append(k)
    return PoseDistribution.from_poses(poses, mult, tol)


class IcpResult(NamedTuple):
    pose: Pose
    iterations: int
    converged: bool
    no_overlap: bool
    residuals: list


def icp_refine(S: PointSet, T: PointSet, init: Pose, max_iters: int = 50, corr_dist: float = 0.5, tree=None) -> IcpResult:
    """Point-to-point ICP from ``init``.

    ``residuals`` holds the RMS correspondence distance measured after each
    refit, using that iteration's correspondences.
    """
    if corr_dist <= 0:
        raise ValueError("corr_dist must be positive")
    tree = cKDTree(T.points) if tree is None else tree
    pose = init
    residuals: list[float] = []
    for it in range(1, max_iters + 1):
        moved = pose.apply(S.points)
        dist, j = tree.query(moved, distance_upper_bound=corr_dist)
        ok = np.isfinite(dist)
        if ok.sum() < 3:
            return IcpResult(pose, it - 1, False, it == 1, residuals)
        src, dst = S.points[ok], T.points[j[ok]]
        try:
            new = fit_rigid_transform(src, dst)
        except RegistrationError:
            return IcpResult(pose, it - 1, False, False, residuals)
        residuals.append(float(np.sqrt(np.mean(np.sum((new.apply(src) - dst) ** 2, axis=1)))))
        dt, dr = new.distance(pose)
        pose = new
        if dt + dr < 1e-6:
            return IcpResult(pose, it, True, False, residuals)
    return IcpResult(pose, max_iters, False, False, residuals)


_RANSAC_CHUNK = 20_000


def _sample_triples(rng: np.random.Generator, n_points: int, count: int) -> np.ndarray:
    return np.argsort(rng.random((count, n_points)), axis=1)[:, :3]


def _triangle_sides(p: np.ndarray) -> np.ndarray:
    return np.stack(
        [
            np.linalg.norm(p[:, 0] - p[:, 1], axis=1),
            np.linalg.norm(p[:, 0] - p[:, 2], axis=1),
            np.linalg.norm(p[:, 1] - p[:, 2], axis=1),
        ],
        axis=1,
    )


def _triangle_area2(p: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)


def ransac_reference_distribution(
    S: PointSet,
    T: PointSet,
    n_trials: int = 100_000,
    max_keep: int = 5000,
    inlier_dist: float = 0.2,
    min_inlier_frac: float = 0.5,
    seed: int = 0,
    icp_iters: int = 30,
    merge_tol: float = MERGE_TOL,
) -> PoseDistribution:
    """Reference pose distribution from congruent-triangle proposals refined by ICP.

    Every trial draws an ordered triangle from each set; pairs whose side
    lengths agree within ``inlier_dist`` are fitted and kept if at least
    ``min_inlier_frac`` of S lands within ``inlier_dist`` of T.  The first
    ``max_keep`` accepted proposals (in trial order) are refined with ICP and
    pooled, poses closer than ``merge_tol`` sharing one sample.
    """
    if len(S) < 3 or len(T) < 3:
        raise ValueError("both point sets need at least 3 points")
    rng = np.random.default_rng(seed)
    tree = cKDTree(T.points)
    ext = np.ptp(np.vstack([S.points, T.points]), axis=0).max()
    area_tol = 1e-6 * max(ext, 1.0) ** 2
    kept_R, kept_t = [], []
    n_kept, done = 0, 0
    while done < n_trials and n_kept < max_keep:
        c = min(_RANSAC_CHUNK, n_trials - done)
        done += c
        si = _sample_triples(rng, len(S), c)
        ti = _sample_triples(rng, len(T), c)
        ps, pt = S.points[si], T.points[ti]
        ok = np.all(np.abs(_triangle_sides(ps) - _triangle_sides(pt)) < inlier_dist, axis=1)
        ok &= _triangle_area2(ps) > area_tol
        if not ok.any():
            continue
        R, t = _kabsch(ps[ok], pt[ok])
        moved = np.einsum("kij,pj->kpi", R, S.points) + t[:, None, :]
        d, _ = tree.query(moved.reshape(-1, 3), distance_upper_bound=inlier_dist)
        frac = np.isfinite(d).reshape(len(R), len(S)).mean(axis=1)
        acc = np.flatnonzero(frac >= min_inlier_frac)[: max_keep - n_kept]
        kept_R.extend(R[acc])
        kept_t.extend(t[acc])
        n_kept += len(acc)
    if n_kept == 0:
        warnings.warn("RANSAC accepted no proposals; reference distribution is empty", RuntimeWarning, stacklevel=2)
        return PoseDistribution()
    log.debug("ransac kept %d proposals out of %d trials", n_kept, done)
    refined = [
        icp_refine(S, T, Pose(_orthonormalize(R), t), icp_iters, 2.0 * inlier_dist, tree=tree).pose
        for R, t in zip(kept_R, kept_t)
    ]
    return PoseDistribution.from_poses(refined, tol=merge_tol)


def _orthonormalize(R: np.ndarray) -> np.ndarray:
    U, _, Vt = np.linalg.svd(R)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt
