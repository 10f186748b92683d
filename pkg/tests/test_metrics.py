import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from multiclipper.metrics import (
    EmptyDistributionError,
    GroundMetric,
    energy_distance,
    median_bandwidth,
    metric_report,
    mmd,
    pairwise_distances,
    transport_cost,
    wasserstein1,
)
from multiclipper.registration import Pose, PoseDistribution
from multiclipper.scenes import random_pose

TR, ROT = GroundMetric.translation_euclidean, GroundMetric.rotation_chordal


def dist_at(*translations, counts=None):
    return PoseDistribution([Pose(np.eye(3), t) for t in translations], counts or [1] * len(translations))


def random_dist(rng, n, max_mult=4):
    return PoseDistribution([random_pose(rng) for _ in range(n)], list(rng.integers(1, max_mult + 1, n)))


def ground(p: Pose, q: Pose, g):
    return np.linalg.norm(p.translation - q.translation) if g is TR else np.linalg.norm(p.rotation - q.rotation)


def naive_ed(A, B, g):
    wa, wb = A.weights, B.weights
    def e(P, wp, Q, wq):
        return sum(wp[i] * wq[j] * ground(p, q, g) for i, p in enumerate(P.samples) for j, q in enumerate(Q.samples))
    return 2 * e(A, wa, B, wb) - e(A, wa, A, wa) - e(B, wb, B, wb)


def naive_mmd(A, B, g, h):
    def e(P, Q):
        tot = 0.0
        for i, p in enumerate(P.samples):
            for j, q in enumerate(Q.samples):
                tot += P.weights[i] * Q.weights[j] * math.exp(-ground(p, q, g) ** 2 / (2 * h * h))
        return tot
    return e(A, A) + e(B, B) - 2 * e(A, B)


def dense_lp_w1(A, B, g):
    c = np.array([[ground(p, q, g) for q in B.samples] for p in A.samples])
    na, nb = c.shape
    A_eq = np.zeros((na + nb, na * nb))
    for i in range(na):
        A_eq[i, i * nb:(i + 1) * nb] = 1
    for j in range(nb):
        A_eq[na + j, j::nb] = 1
    res = linprog(c.ravel(), A_eq=A_eq, b_eq=np.concatenate([A.weights, B.weights]), bounds=(0, None), method="highs")
    return res.fun


def test_ground_metric_parse():
    assert GroundMetric.parse("trans") is TR and GroundMetric.parse("rotation_chordal") is ROT
    with pytest.raises(ValueError):
        GroundMetric.parse("yaw")


def test_pairwise_examples():
    a = dist_at((0, 0, 0))
    assert pairwise_distances(a, a, TR)[0, 0] == 0
    assert pairwise_distances(a, dist_at((3, 4, 0)), TR)[0, 0] == pytest.approx(5)
    flip = PoseDistribution([Pose(np.diag([-1.0, -1.0, 1.0]))], [1])
    assert pairwise_distances(a, flip, ROT)[0, 0] == pytest.approx(math.sqrt(8))
    with pytest.raises(EmptyDistributionError):
        pairwise_distances(PoseDistribution(), a, TR)


def test_closed_forms():
    a, b = dist_at((0, 0, 0)), dist_at((1, 0, 0))
    assert energy_distance(a, b, TR) == pytest.approx(2.0)
    assert mmd(a, b, TR, bandwidth=1.0) == pytest.approx(2 - 2 * math.exp(-0.5))
    assert wasserstein1(a, b, TR) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        mmd(a, b, TR, bandwidth=0)
    with pytest.raises(ValueError):
        mmd(a, b, TR, bandwidth="silverman")


def test_median_fallback():
    a = dist_at((0, 0, 0), counts=[3])
    assert median_bandwidth(a, a, TR) == 1.0
    # round-off sized spreads also count as coincident
    b = dist_at((1e-15, 0, 0))
    assert median_bandwidth(a, b, TR) == 1.0


def test_median_bandwidth_counts_copies():
    a = dist_at((0, 0, 0), counts=[3])
    b = dist_at((2, 0, 0))
    # three copies at 0 and one at 2: pair distances (0, 0, 0, 2, 2, 2), lower median 0
    assert median_bandwidth(a, b, TR) == 1.0
    assert median_bandwidth(dist_at((0, 0, 0), counts=[2]), b, TR) == 2.0
    c = dist_at((0, 0, 0), (1, 0, 0))
    assert median_bandwidth(c, dist_at((3, 0, 0)), TR) == 2.0


@pytest.mark.parametrize("g", [TR, ROT])
def test_oracles_random(g):
    r = np.random.default_rng(7)
    for n_a, n_b in [(1, 4), (5, 5), (12, 7)]:
        A, B = random_dist(r, n_a), random_dist(r, n_b)
        assert energy_distance(A, B, g) == pytest.approx(naive_ed(A, B, g), abs=1e-12)
        h = median_bandwidth(A, B, g)
        assert mmd(A, B, g) == pytest.approx(naive_mmd(A, B, g, h), abs=1e-12)
        assert wasserstein1(A, B, g) == pytest.approx(dense_lp_w1(A, B, g), abs=1e-9)


def test_w1_one_dimensional_closed_form():
    r = np.random.default_rng(3)
    for _ in range(5):
        xa, xb = r.normal(size=30), r.normal(1, 2, size=40)
        A = dist_at(*[(x, 0, 0) for x in xa])
        B = dist_at(*[(x, 0, 0) for x in xb])
        grid = np.sort(np.concatenate([xa, xb]))
        fa = np.searchsorted(np.sort(xa), grid[:-1], side="right") / 30
        fb = np.searchsorted(np.sort(xb), grid[:-1], side="right") / 40
        want = np.sum(np.abs(fa - fb) * np.diff(grid))
        assert wasserstein1(A, B, TR) == pytest.approx(want, abs=1e-9)


def test_transport_cost_degenerate_shapes():
    c = np.array([[1.0, 2.0, 3.0]])
    assert transport_cost(c, np.array([1.0]), np.array([0.2, 0.3, 0.5])) == pytest.approx(2.3)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_symmetry_and_identity(seed):
    r = np.random.default_rng(seed)
    A, B = random_dist(r, 6), random_dist(r, 4)
    for g in (TR, ROT):
        for fn in (energy_distance, mmd, wasserstein1):
            assert fn(A, A, g) == pytest.approx(0, abs=1e-12)
            assert fn(A, B, g) == pytest.approx(fn(B, A, g), abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_w1_triangle_inequality(seed):
    r = np.random.default_rng(seed)
    A, B, C = random_dist(r, 5), random_dist(r, 6), random_dist(r, 4)
    for g in (TR, ROT):
        assert wasserstein1(A, C, g) <= wasserstein1(A, B, g) + wasserstein1(B, C, g) + 1e-9


def test_order_and_split_invariance():
    r = np.random.default_rng(11)
    A, B = random_dist(r, 5), random_dist(r, 5)
    perm = r.permutation(5)
    Ap = PoseDistribution([A.samples[i] for i in perm], [A.multiplicities[i] for i in perm])
    split = PoseDistribution(
        [p for p, k in zip(A.samples, A.multiplicities) for _ in range(k)], [1] * A.total
    )
    for g in (TR, ROT):
        for fn in (energy_distance, mmd):
            ref = fn(A, B, g)
            assert fn(Ap, B, g) == pytest.approx(ref, abs=1e-12)
            assert fn(split, B, g) == pytest.approx(ref, abs=1e-12)


def test_rotation_isometry_invariance():
    r = np.random.default_rng(5)
    A, B = random_dist(r, 6), random_dist(r, 5)
    Q = random_pose(r).rotation

    def turn(D):
        return PoseDistribution([Pose(Q @ p.rotation, p.translation) for p in D.samples], D.multiplicities)

    for fn in (energy_distance, mmd, wasserstein1):
        assert fn(turn(A), turn(B), ROT) == pytest.approx(fn(A, B, ROT), abs=1e-9)


def test_metric_report_records():
    a, b = dist_at((0, 0, 0)), dist_at((1, 0, 0))
    recs = metric_report(a, b)
    assert len(recs) == 6
    assert {(r["metric"], r["component"]) for r in recs} == {
        (m, c) for m in ("MMD", "ED", "W1") for c in ("trans", "rot")
    }
    w1t = next(r for r in recs if r["metric"] == "W1" and r["component"] == "trans")
    assert w1t["value"] == pytest.approx(1.0)
