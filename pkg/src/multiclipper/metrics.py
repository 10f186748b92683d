"""Distances between weighted empirical pose distributions.

Every metric works on one component at a time: translations under the
Euclidean distance or rotations under the chordal (Frobenius) distance.
Sample multiplicities act as weights.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from multiclipper.registration import PoseDistribution


# distances below this are treated as exact coincidence
ZERO_DISTANCE = 1e-9


class GroundMetric(str, enum.Enum):
    translation_euclidean = "translation_euclidean"
    rotation_chordal = "rotation_chordal"

    @classmethod
    def parse(cls, g) -> "GroundMetric":
        if isinstance(g, cls):
            return g
        aliases = {"trans": cls.translation_euclidean, "translation": cls.translation_euclidean,
                   "rot": cls.rotation_chordal, "rotation": cls.rotation_chordal}
        return aliases.get(g) or cls(g)

    @property
    def short(self) -> str:
        return "trans" if self is GroundMetric.translation_euclidean else "rot"


class EmptyDistributionError(ValueError):
    pass


def _features(dist: PoseDistribution, g: GroundMetric) -> np.ndarray:
    if len(dist) == 0:
        raise EmptyDistributionError("distribution has no samples")
    if g is GroundMetric.translation_euclidean:
        return dist.translations
    return dist.rotations.reshape(-1, 9)


def _cdist(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - y[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def pairwise_distances(A: PoseDistribution, B: PoseDistribution, g) -> np.ndarray:
    g = GroundMetric.parse(g)
    return _cdist(_features(A, g), _features(B, g))


def energy_distance(A: PoseDistribution, B: PoseDistribution, g) -> float:
    """Squared-form energy distance ``2 E|X-Y| - E|X-X'| - E|Y-Y'|``."""
    wa, wb = A.weights, B.weights
    val = 2.0 * wa @ pairwise_distances(A, B, g) @ wb
    val -= wa @ pairwise_distances(A, A, g) @ wa
    val -= wb @ pairwise_distances(B, B, g) @ wb
    return max(float(val), 0.0)


def median_bandwidth(A: PoseDistribution, B: PoseDistribution, g) -> float:
    """Lower median of all pairwise distances in the pooled, multiplicity-expanded sample.

    Falls back to 1.0 when that median is zero, i.e. below ``ZERO_DISTANCE``
    (round-off between poses that are identical in exact arithmetic).
    """
    g = GroundMetric.parse(g)
    x = np.vstack([_features(A, g), _features(B, g)])
    c = np.asarray(A.multiplicities + B.multiplicities, dtype=np.float64)
    iu = np.triu_indices(len(x), k=1)
    d = _cdist(x, x)[iu]
    w = (c[:, None] * c[None, :])[iu]
    # pairs between copies of one sample sit at distance zero
    d = np.append(d, 0.0)
    w = np.append(w, np.sum(c * (c - 1) / 2.0))
    order = np.argsort(d, kind="stable")
    cum = np.cumsum(w[order])
    h = float(d[order][np.searchsorted(cum, cum[-1] / 2.0)])
    return h if h > ZERO_DISTANCE else 1.0


def mmd(A: PoseDistribution, B: PoseDistribution, g, bandwidth="median") -> float:
    """Biased (V-statistic) squared MMD with a Gaussian kernel on the ground distance."""
    if isinstance(bandwidth, str):
        if bandwidth != "median":
            raise ValueError("bandwidth must be a positive number or 'median'")
        h = median_bandwidth(A, B, g)
    else:
        h = float(bandwidth)
        if h <= 0:
            raise ValueError("bandwidth must be positive")

    def k(P, Q):
        return np.exp(-pairwise_distances(P, Q, g) ** 2 / (2.0 * h * h))

    wa, wb = A.weights, B.weights
    val = wa @ k(A, A) @ wa + wb @ k(B, B) @ wb - 2.0 * wa @ k(A, B) @ wb
    return max(float(val), 0.0)


def transport_cost(cost: np.ndarray, wa: np.ndarray, wb: np.ndarray) -> float:
    """Exact optimal transport cost between two weight vectors (dual simplex LP)."""
    na, nb = cost.shape
    if na == 1 or nb == 1:
        return float(wa @ cost @ wb)
    rows = sparse.kron(sparse.eye(na), np.ones((1, nb)))
    cols = sparse.kron(np.ones((1, na)), sparse.eye(nb))
    # the last column constraint is implied by the others
    A_eq = sparse.vstack([rows, cols.tocsr()[:-1]]).tocsc()
    b_eq = np.concatenate([wa, wb[:-1]])
    res = linprog(
        cost.ravel(),
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(res.fun)


def wasserstein1(A: PoseDistribution, B: PoseDistribution, g) -> float:
    return transport_cost(pairwise_distances(A, B, g), A.weights, B.weights)


METRICS = {"mmd": mmd, "ed": energy_distance, "w1": wasserstein1}


def metric_report(A: PoseDistribution, B: PoseDistribution, metrics=("mmd", "ed", "w1"), bandwidth="median") -> list[dict]:
    """Records ``{metric, component, value}`` for each metric on both components."""
    out = []
    for name in metrics:
        fn = METRICS[name.lower()]
        for g in GroundMetric:
            val = fn(A, B, g, bandwidth) if fn is mmd else fn(A, B, g)
            out.append({"metric": name.upper(), "component": g.short, "value": val})
    return out
