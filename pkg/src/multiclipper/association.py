"""Candidate associations and the geometric-consistency affinity matrix."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PointSet:
    """Ordered list of 3D points (meters) expressed in ``frame_id``."""

    points: np.ndarray
    frame_id: str = "world"

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", _frozen(pts))

    def __len__(self) -> int:
        return len(self.points)

    def to_dict(self) -> dict:
        return {"frame_id": self.frame_id, "points": self.points.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PointSet":
        if "points" not in d:
            raise ValueError("point set JSON needs a 'points' field")
        return cls(np.asarray(d["points"], dtype=np.float64).reshape(-1, 3), str(d.get("frame_id", "world")))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "PointSet":
        return cls.from_dict(json.loads(Path(path).read_text()))


class Association(NamedTuple):
    s_index: int
    t_index: int


@dataclass(frozen=True)
class AffinityMatrix:
    """Pairwise consistency scores between candidate associations.

    ``m`` has unit diagonal and entries in [0, 1]; ``mask_c`` marks the
    off-diagonal zeros of ``m`` (the inconsistent pairs).
    """

    m: np.ndarray
    mask_c: np.ndarray
    candidates: tuple
    sigma: float
    epsilon: float

    @property
    def n(self) -> int:
        return self.m.shape[0]

    @classmethod
    def from_matrix(cls, m, candidates=None, sigma=float("nan"), epsilon=float("nan")) -> "AffinityMatrix":
        """Wrap an arbitrary symmetric [0,1] matrix; the diagonal is forced to 1."""
        m = np.array(m, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("affinity matrix must be square")
        if not np.allclose(m, m.T, atol=1e-12, rtol=0):
            raise ValueError("affinity matrix must be symmetric")
        if m.min(initial=0.0) < 0 or m.max(initial=0.0) > 1:
            raise ValueError("affinity entries must lie in [0, 1]")
        np.fill_diagonal(m, 1.0)
        mask = (m == 0).astype(np.float64)
        if candidates is None:
            candidates = tuple(Association(i, i) for i in range(len(m)))
        return cls(_frozen(m), _frozen(mask), tuple(candidates), float(sigma), float(epsilon))


@dataclass(frozen=True)
class PenalizedAffinity:
    base: AffinityMatrix
    d: float
    m_d: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.base.n


def all_pairs_candidates(S: PointSet, T: PointSet) -> list[Association]:
    """All |S|*|T| associations, s-major."""
    return [Association(i, j) for i in range(len(S)) for j in range(len(T))]


def consistency_distance(a_i: Association, a_j: Association, S: PointSet, T: PointSet) -> float:
    ds = np.linalg.norm(S.points[a_i.s_index] - S.points[a_j.s_index])
    dt = np.linalg.norm(T.points[a_i.t_index] - T.points[a_j.t_index])
    return float(abs(ds - dt))


def _pairwise(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def build_affinity(
    S: PointSet,
    T: PointSet,
    candidates: Sequence[Association],
    sigma: float,
    epsilon: float,
    exclusive_endpoints: bool = True,
) -> AffinityMatrix:
    """Gaussian consistency scores, cut off at ``epsilon``.

    With ``exclusive_endpoints`` two candidates sharing a source or target
    point are marked inconsistent.
    """
    if sigma <= 0 or epsilon <= 0:
        raise ValueError("sigma and epsilon must be positive")
    if len(candidates) == 0:
        raise ValueError("need at least one candidate association")
    cand = np.asarray(candidates, dtype=np.int64).reshape(-1, 2)
    si, ti = cand[:, 0], cand[:, 1]
    if si.min() < 0 or si.max() >= len(S) or ti.min() < 0 or ti.max() >= len(T):
        raise IndexError("candidate index out of range")

    ds = _pairwise(S.points)[np.ix_(si, si)]
    dt = _pairwise(T.points)[np.ix_(ti, ti)]
    dist = np.abs(ds - dt)
    m = np.where(dist < epsilon, np.exp(-(dist**2) / (2.0 * sigma**2)), 0.0)
    if exclusive_endpoints:
        shared = (si[:, None] == si[None, :]) | (ti[:, None] == ti[None, :])
        m[shared] = 0.0
    m = 0.5 * (m + m.T)
    np.fill_diagonal(m, 1.0)
    mask = (m == 0).astype(np.float64)
    return AffinityMatrix(
        _frozen(m),
        _frozen(mask),
        tuple(Association(int(a), int(b)) for a, b in cand),
        float(sigma),
        float(epsilon),
    )


def penalize(base: AffinityMatrix, d: float) -> PenalizedAffinity:
    if d < 0:
        raise ValueError("penalty d must be non-negative")
    m_d = base.m - d * base.mask_c
    return PenalizedAffinity(base, float(d), _frozen(m_d))
