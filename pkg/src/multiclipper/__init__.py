"""Multimodal global data association with particle-based CLIPPER solvers."""

from multiclipper.association import (
    AffinityMatrix,
    Association,
    PenalizedAffinity,
    PointSet,
    all_pairs_candidates,
    build_affinity,
    consistency_distance,
    penalize,
)
from multiclipper.metrics import energy_distance, mmd, pairwise_distances, wasserstein1
from multiclipper.oracle import (
    ConsistencyGraph,
    binarize,
    coverage_report,
    enumerate_maximal_cliques,
)
from multiclipper.registration import (
    Pose,
    PoseDistribution,
    clique_to_pose,
    cliques_to_distribution,
    fit_rigid_transform,
    icp_refine,
    ransac_reference_distribution,
)
from multiclipper.scenes import SceneSpec, generate, subset
from multiclipper.solvers import (
    Clique,
    ParticleEnsemble,
    SolverConfig,
    SolverResult,
    extract_clique,
    objective,
    run_baseline_clipper,
    run_langevin_clipper,
    run_stein_clipper,
    score,
)

__version__ = "0.1.0"
