"""Particle solvers over the relaxed CLIPPER objective.

Each particle is a nonnegative unit vector ``u`` over the candidate
associations.  The log-density of a particle is ``F_d(u) = u^T M_d u``; the
solvers move an ensemble of particles along kernelized (Stein) or noisy
(Langevin) ascent directions and read a clique off every particle at the end.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import linalg

from multiclipper.association import AffinityMatrix, PenalizedAffinity, penalize

log = logging.getLogger(__name__)

ADAGRAD_EPS = 1e-8
ADAGRAD_MODES = ("cumulative", "decayed")
NOISE_MODES = {"paper_2sqrt": 2.0, "standard_sqrt2": math.sqrt(2.0)}
DEFAULT_STEP = {"stein": 1e-3, "langevin": 1.0, "baseline": 1.0}
FEASIBILITY_TOL = 1e-9
# floats drawn per noise refill, bounds memory for large ensembles
_NOISE_BLOCK = 2_000_000


@dataclass
class SolverConfig:
    n_particles: int = 1000
    max_inner_iters: int = 1000
    step_size: float | None = None  # None picks the per-solver default
    adagrad: str = "cumulative"
    adagrad_decay: float = 0.9  # decayed mode
    adagrad_initial: float = 0.9  # cumulative mode
    kernel_bandwidth: float = 0.005
    noise_scale_mode: str = "paper_2sqrt"
    adagrad_noise: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.max_inner_iters < 1:
            raise ValueError("max_inner_iters must be >= 1")
        if self.step_size is not None and self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.adagrad not in ADAGRAD_MODES:
            raise ValueError(f"unknown adagrad mode {self.adagrad!r}")
        if not 0 < self.adagrad_decay < 1:
            raise ValueError("adagrad_decay must lie in (0, 1)")
        if self.adagrad_initial < 0:
            raise ValueError("adagrad_initial must be >= 0")
        if self.kernel_bandwidth <= 0:
            raise ValueError("kernel_bandwidth must be positive")
        if self.noise_scale_mode not in NOISE_MODES:
            raise ValueError(f"unknown noise_scale_mode {self.noise_scale_mode!r}")

    def step_for(self, solver: str) -> float:
        return DEFAULT_STEP[solver] if self.step_size is None else float(self.step_size)

    def initial_accumulator(self) -> float:
        return self.adagrad_initial if self.adagrad == "cumulative" else 0.0

    def rescale(self, direction: np.ndarray, acc: np.ndarray) -> np.ndarray:
        if self.adagrad == "cumulative":
            return adagrad_cumulative(direction, acc)
        return adagrad_rescale(direction, acc, self.adagrad_decay)


@dataclass
class ParticleEnsemble:
    theta: np.ndarray
    adagrad_acc: np.ndarray
    rng_seeds: np.ndarray

    @classmethod
    def initialize(cls, n_particles: int, n: int, seed: int, acc0: float = 0.0) -> "ParticleEnsemble":
        """Uniform [0, 1] rows, each drawn from its own per-particle stream."""
        seeds = np.random.SeedSequence(seed).generate_state(n_particles, np.uint64)
        theta = np.empty((n_particles, n))
        for i, s in enumerate(seeds):
            theta[i] = _uniform_rng(s).random(n)
        return cls(theta, np.full_like(theta, acc0), seeds)

    @property
    def n_particles(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True, order=True)
class Clique:
    indices: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(int(i) for i in self.indices)))

    @property
    def omega_hat(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)


@dataclass
class RunReport:
    solver: str
    n: int
    n_particles: int
    iterations: int
    stages: list
    step_size: float
    objectives: list = field(default_factory=list)
    reinit_counts: list = field(default_factory=list)
    feasibility_violations: int = 0
    warnings: list = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self, cliques=None) -> dict:
        particles = []
        for i in range(self.n_particles):
            rec = {
                "objective": self.objectives[i] if self.objectives else None,
                "iterations": self.iterations,
                "reinit_count": self.reinit_counts[i] if self.reinit_counts else 0,
            }
            if cliques is not None:
                rec["clique"] = list(cliques[i].indices)
                rec["omega_hat"] = cliques[i].omega_hat
            particles.append(rec)
        return {
            "solver": self.solver,
            "n": self.n,
            "n_particles": self.n_particles,
            "iterations": self.iterations,
            "homotopy_stages": self.stages,
            "step_size": self.step_size,
            "feasibility_violations": self.feasibility_violations,
            "warnings": list(self.warnings),
            "particles": particles,
            "timing": {"wall_time": self.wall_time},
        }


class SolverResult(NamedTuple):
    cliques: list
    ensemble: ParticleEnsemble
    report: RunReport

    @property
    def clique(self) -> Clique:
        """First particle's clique; the whole answer for the baseline."""
        return self.cliques[0]


def _uniform_rng(seed) -> np.random.Generator:
    return np.random.default_rng([int(seed), 1])


def _noise_rng(seed) -> np.random.Generator:
    return np.random.default_rng([int(seed), 0])


# -- differentiable pieces -------------------------------------------------


def objective(u, pa: PenalizedAffinity) -> float:
    u = np.asarray(u, dtype=np.float64)
    return float(u @ pa.m_d @ u)


def score(u, pa: PenalizedAffinity) -> np.ndarray:
    """Gradient of ``u^T M_d u``.  Works row-wise on a stack of particles."""
    return 2.0 * (np.asarray(u, dtype=np.float64) @ pa.m_d)


def rbf_kernel(x, y, sigma_k: float) -> tuple[float, np.ndarray]:
    """RBF kernel value and its gradient with respect to ``y``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    diff = x - y
    k = math.exp(-float(diff @ diff) / (2.0 * sigma_k**2))
    return k, k * diff / sigma_k**2


def svgd_direction(theta: np.ndarray, pa: PenalizedAffinity, sigma_k: float) -> np.ndarray:
    """Stein variational direction for every row of ``theta``.

    Row i is ``(1/N) sum_j [k(x_i, x_j) score(x_j) + grad_{x_j} k(x_i, x_j)]``.
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=np.float64))
    n_p = theta.shape[0]
    sq = np.einsum("ij,ij->i", theta, theta)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (theta @ theta.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    K = np.exp(-d2 / (2.0 * sigma_k**2))
    attract = K @ score(theta, pa)
    repulse = (K.sum(axis=1)[:, None] * theta - K @ theta) / sigma_k**2
    return (attract + repulse) / n_p


def langevin_direction(u, pa: PenalizedAffinity, alpha: float, noise, mode: str = "paper_2sqrt") -> np.ndarray:
    """Full Langevin increment ``alpha * score + c * sqrt(alpha) * noise``."""
    c = NOISE_MODES[mode]
    return alpha * score(u, pa) + c * math.sqrt(alpha) * np.asarray(noise, dtype=np.float64)


def adagrad_rescale(direction: np.ndarray, acc: np.ndarray, decay: float) -> np.ndarray:
    """Decayed squared-gradient rescaling; ``acc`` is updated in place."""
    acc *= decay
    acc += (1.0 - decay) * direction**2
    return direction / (np.sqrt(acc) + ADAGRAD_EPS)


def adagrad_cumulative(direction: np.ndarray, acc: np.ndarray) -> np.ndarray:
    """Classic AdaGrad: ``acc`` keeps the running sum of squared directions (in place)."""
    acc += direction**2
    return direction / (np.sqrt(acc) + ADAGRAD_EPS)


def project(u) -> tuple[np.ndarray, bool]:
    """Normalize to unit length, then clamp negatives.

    Returns ``(projected, degenerate)``; degenerate inputs (zero or entirely
    non-positive) come back as the zero vector.
    """
    out, bad = project_rows(np.atleast_2d(np.asarray(u, dtype=np.float64)))
    return out[0], bool(bad[0])


def project_rows(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(theta, axis=1)
    bad = ~(norms > 0) | ~np.isfinite(norms)
    safe = np.where(bad, 1.0, norms)
    out = np.maximum(theta / safe[:, None], 0.0)
    out[bad] = 0.0
    bad |= ~out.any(axis=1)
    return out, bad


def max_eigenvalue(m, max_iters: int = 1000, rtol: float = 1e-6) -> float:
    """Largest eigenvalue of a symmetric nonnegative matrix by power iteration."""
    m = m.m if isinstance(m, AffinityMatrix) else np.asarray(m, dtype=np.float64)
    v = np.ones(m.shape[0]) / math.sqrt(m.shape[0])
    lam = float(v @ m @ v)
    for _ in range(max_iters):
        w = m @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        new = float(v @ m @ v)
        if abs(new - lam) <= rtol * abs(new):
            return new
        lam = new
    log.debug("power iteration did not converge, using dense eigensolver")
    return float(linalg.eigvalsh(m, subset_by_index=[m.shape[0] - 1, m.shape[0] - 1])[0])


def extract_clique(u, pa: PenalizedAffinity) -> Clique:
    u = np.asarray(u, dtype=np.float64)
    omega = int(round(objective(u, pa)))
    omega = min(max(omega, 0), len(u))
    if omega == 0:
        return Clique(())
    order = np.argsort(-u, kind="stable")
    return Clique(tuple(order[:omega]))


def homotopy_schedule(m: AffinityMatrix) -> list[float]:
    """Penalty values d = k * lambda_1(M) for k = 1.. until d >= n."""
    step = max_eigenvalue(m)
    ds, d = [], 0.0
    while d < m.n:
        d += step
        ds.append(d)
    return ds


# -- driver ----------------------------------------------------------------


class _Stepper:
    """Shared bookkeeping: projection, re-initialization, feasibility audit."""

    def __init__(self, ens: ParticleEnsemble, report: RunReport, audit: Callable | None):
        self.ens = ens
        self.report = report
        self.audit = audit
        self.uniform = [_uniform_rng(s) for s in ens.rng_seeds]
        # skip the draw already used for initialization
        n = ens.theta.shape[1]
        for g in self.uniform:
            g.random(n)
        self.reinit = np.zeros(ens.n_particles, dtype=np.int64)

    def project(self, theta: np.ndarray) -> np.ndarray:
        theta, bad = project_rows(theta)
        flagged = np.flatnonzero(bad)
        # the AdaGrad state of a re-initialized particle is kept on purpose
        for i in flagged:
            self.reinit[i] += 1
            row = self.uniform[i].random(theta.shape[1])
            theta[i] = row / np.linalg.norm(row)
        if len(flagged):
            self.report.warnings.append(
                f"iteration {self.report.iterations}: re-initialized {len(flagged)} degenerate particle(s)"
            )
            log.debug("re-initialized %d degenerate particles", len(flagged))
        norms = np.linalg.norm(theta, axis=1)
        self.report.feasibility_violations += int(np.sum((norms > 1 + FEASIBILITY_TOL) | (theta.min(axis=1) < 0)))
        if self.audit is not None:
            self.audit(theta)
        return theta


def _finish(ens: ParticleEnsemble, pa: PenalizedAffinity, report: RunReport, stepper: _Stepper, t0: float) -> SolverResult:
    cliques = [extract_clique(row, pa) for row in ens.theta]
    if not any(cliques):
        report.warnings.append("no particle produced a nonempty clique; the run may not have converged")
    report.objectives = [float(v) for v in np.einsum("ij,ij->i", ens.theta @ pa.m_d, ens.theta)]
    report.reinit_counts = [int(c) for c in stepper.reinit]
    report.wall_time = time.perf_counter() - t0
    return SolverResult(cliques, ens, report)


def run_stein_clipper(m: AffinityMatrix, cfg: SolverConfig, init=None, audit=None) -> SolverResult:
    """Stein CLIPPER: SVGD ascent with a penalty homotopy.

    ``init`` optionally overrides the seeded uniform initialization; ``audit``
    is called with the particle matrix after every projection.
    """
    t0 = time.perf_counter()
    ens = ParticleEnsemble.initialize(cfg.n_particles, m.n, cfg.seed, cfg.initial_accumulator())
    if init is not None:
        ens.theta = np.array(init, dtype=np.float64).reshape(cfg.n_particles, m.n)
    alpha = cfg.step_for("stein")
    ds = homotopy_schedule(m)
    per_stage = max(1, cfg.max_inner_iters // len(ds))
    report = RunReport("stein", m.n, cfg.n_particles, 0, ds, alpha)
    stepper = _Stepper(ens, report, audit)
    pa = penalize(m, 0.0)
    for d in ds:
        pa = penalize(m, d)
        for _ in range(per_stage):
            phi = svgd_direction(ens.theta, pa, cfg.kernel_bandwidth)
            step = cfg.rescale(phi, ens.adagrad_acc)
            ens.theta = stepper.project(ens.theta + alpha * step)
            report.iterations += 1
    return _finish(ens, pa, report, stepper, t0)


class _NoiseSource:
    """Per-particle Gaussian streams, refilled in blocks of iterations."""

    def __init__(self, seeds, n: int):
        self.gens = [_noise_rng(s) for s in seeds]
        self.n = n
        self.block = max(1, _NOISE_BLOCK // (len(seeds) * n))
        self.buf = None
        self.pos = 0

    def next(self) -> np.ndarray:
        if self.buf is None or self.pos == self.buf.shape[1]:
            self.buf = np.stack([g.standard_normal((self.block, self.n)) for g in self.gens])
            self.pos = 0
        out = self.buf[:, self.pos, :]
        self.pos += 1
        return out


def run_langevin_clipper(m: AffinityMatrix, cfg: SolverConfig, init=None, audit=None) -> SolverResult:
    """Langevin CLIPPER: noisy ascent at fixed penalty d = n."""
    t0 = time.perf_counter()
    ens = ParticleEnsemble.initialize(cfg.n_particles, m.n, cfg.seed, cfg.initial_accumulator())
    if init is not None:
        ens.theta = np.array(init, dtype=np.float64).reshape(cfg.n_particles, m.n)
    alpha = cfg.step_for("langevin")
    c = NOISE_MODES[cfg.noise_scale_mode]
    pa = penalize(m, float(m.n))
    report = RunReport("langevin", m.n, cfg.n_particles, 0, [float(m.n)], alpha)
    stepper = _Stepper(ens, report, audit)
    noise = _NoiseSource(ens.rng_seeds, m.n)
    for _ in range(cfg.max_inner_iters):
        xi = noise.next()
        if cfg.adagrad_noise:
            phi = langevin_direction(ens.theta, pa, alpha, xi, cfg.noise_scale_mode)
            step = alpha * cfg.rescale(phi, ens.adagrad_acc)
        else:
            drift = cfg.rescale(alpha * score(ens.theta, pa), ens.adagrad_acc)
            step = alpha * drift + c * math.sqrt(alpha) * xi
        ens.theta = stepper.project(ens.theta + step)
        report.iterations += 1
    return _finish(ens, pa, report, stepper, t0)


def run_baseline_clipper(m: AffinityMatrix, cfg: SolverConfig, init=None, trace=None) -> SolverResult:
    """Single-solution CLIPPER: projected gradient ascent with the penalty homotopy.

    The schedule is the Stein one preceded by an unpenalized ``d = 0`` stage,
    which drives the particle toward the leading eigenvector of ``M`` before
    penalties apply.  Each projected step is rescaled back to unit norm, so the
    iterate stays on the sphere; otherwise, once the objective is negative,
    shrinking toward zero counts as ascent and the search stalls on an empty
    clique.  Steps follow the raw gradient and are accepted only if
    the objective does not decrease; otherwise the step is halved (up to 40
    times) and the stage ends when no ascent step is left.  ``trace``
    receives ``(stage_index, objective)`` after each accepted step.
    """
    t0 = time.perf_counter()
    ens = ParticleEnsemble.initialize(1, m.n, cfg.seed)
    if init is not None:
        ens.theta = np.array(init, dtype=np.float64).reshape(1, m.n)
    alpha = cfg.step_for("baseline")
    ds = [0.0] + homotopy_schedule(m)
    per_stage = max(1, cfg.max_inner_iters // len(ds))
    report = RunReport("baseline", m.n, 1, 0, ds, alpha)
    stepper = _Stepper(ens, report, None)
    ens.theta = stepper.project(ens.theta)
    pa = penalize(m, 0.0)
    for k, d in enumerate(ds):
        pa = penalize(m, d)
        u = ens.theta[0]
        f = objective(u, pa)
        for _ in range(per_stage):
            g = score(u, pa)
            report.iterations += 1
            a = alpha
            for _ in range(40):
                cand, bad = project(u + a * g)
                if not bad:
                    cand /= np.linalg.norm(cand)
                    fc = objective(cand, pa)
                    if fc >= f:
                        break
                a *= 0.5
            else:
                break
            if np.array_equal(cand, u):
                break
            u, f = cand, fc
            if trace is not None:
                trace(k, f)
        ens.theta[0] = u
    return _finish(ens, pa, report, stepper, t0)
