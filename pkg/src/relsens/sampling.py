"""Monte Carlo and importance sampling estimators of the failure probability.

Samples live in the correlated standard normal space ``z ~ N(0, rho_u)`` of the
Nataf model (see :mod:`relsens.transform`); a :class:`SampleBatch` keeps the
samples, their limit-state values and both log densities so that sensitivity
estimates can be computed afterwards without new limit-state evaluations.
"""
from __future__ import annotations

import csv
import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import std_normal_quantile
from .errors import DegenerateWeights, NonFiniteLimitState, OutOfRange
from .rng import standard_normal_block
from .transform import ZeroMeanGaussian

CHUNK = 1 << 14
THREADS_ENV = "RELSENS_THREADS"


class Method(str, enum.Enum):
    MONTE_CARLO = "mcs"
    IMPORTANCE_SAMPLING = "is"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        aliases = {"mc": "mcs", "montecarlo": "mcs", "monte_carlo": "mcs",
                   "importance_sampling": "is", "importance": "is"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class SamplingPlan:
    method: Method
    n_samples: int
    seed: int = 0
    is_center: Optional[np.ndarray] = None
    is_cov: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        if int(self.n_samples) < 1:
            raise ValueError("n_samples must be at least 1")
        object.__setattr__(self, "n_samples", int(self.n_samples))
        if self.is_center is not None:
            object.__setattr__(self, "is_center", np.array(self.is_center, dtype=float))
        if self.is_cov is not None:
            object.__setattr__(self, "is_cov", np.array(self.is_cov, dtype=float))

    def with_seed(self, seed):
        return SamplingPlan(self.method, self.n_samples, seed, self.is_center, self.is_cov)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    u: np.ndarray       # (N, m) samples in the correlated standard normal space
    g: np.ndarray       # (N,) limit-state values
    log_f0: np.ndarray  # log density of N(0, base_cov)
    log_fs: np.ndarray  # log density the samples were drawn from
    plan: SamplingPlan
    base_cov: np.ndarray

    @property
    def n(self):
        return self.g.shape[0]

    @property
    def dim(self):
        return self.u.shape[1]

    @property
    def failed(self):
        return self.g <= 0.0

    @property
    def weights(self):
        return np.exp(self.log_f0 - self.log_fs)


@dataclass(frozen=True)
class PfEstimate:
    pf_hat: float
    beta_hat: float
    n_failures: int
    std_error: float
    degenerate: bool = False  # pf_hat is 0 or 1; beta_hat is an infinite sentinel


def pf_to_beta(pf):
    """beta = -Phi^-1(pf); returns +inf at pf = 0 and -inf at pf = 1."""
    pf = float(pf)
    if not 0.0 <= pf <= 1.0:
        raise OutOfRange(f"failure probability {pf} is outside [0, 1]")
    if pf == 0.0:
        return math.inf
    if pf == 1.0:
        return -math.inf
    return -float(std_normal_quantile(pf))


def default_workers():
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _chunks(n):
    return [(s, min(CHUNK, n - s)) for s in range(0, n, CHUNK)]


def _draw(ls, transform, plan, workers):
    m = transform.dim
    base = transform.base_density
    if plan.method is Method.IMPORTANCE_SAMPLING:
        if plan.is_center is None:
            raise ValueError("importance sampling needs a sampling center")
        center = plan.is_center
        if center.shape != (m,):
            raise ValueError(f"sampling center must have {m} coordinates")
        sampler = ZeroMeanGaussian(np.eye(m) if plan.is_cov is None else plan.is_cov)
    else:
        center, sampler = None, None

    def work(chunk):
        start, count = chunk
        e = standard_normal_block(plan.seed, start, count, m)
        if sampler is None:
            u = e @ base.chol.T
            log_f0 = base.logpdf(u)
            log_fs = log_f0
        else:
            shift = e @ sampler.chol.T
            u = center + shift
            log_f0 = base.logpdf(u)
            log_fs = sampler.logpdf(shift)
        g = ls(transform.z_to_x(u))
        return u, g, log_f0, log_fs

    chunks = _chunks(plan.n_samples)
    workers = min(workers or default_workers(), len(chunks))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    u, g, log_f0, log_fs = (np.concatenate(p) for p in zip(*parts))
    bad = np.flatnonzero(~np.isfinite(g))
    if bad.size:
        raise NonFiniteLimitState(bad[0], g[bad[0]])
    return SampleBatch(u, g, log_f0, log_fs, plan, transform.rho_u)


def _estimate(batch):
    n = batch.n
    fail = batch.failed
    n_fail = int(fail.sum())
    if batch.plan.method is Method.MONTE_CARLO:
        pf = n_fail / n
        se = math.sqrt(pf * (1.0 - pf) / n)
    else:
        contrib = np.where(fail, batch.weights, 0.0)
        if n_fail and not np.any(contrib > 0.0):
            raise DegenerateWeights("every failing sample has zero weight")
        pf = float(contrib.sum() / n)
        se = float(contrib.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    degenerate = pf <= 0.0 or pf >= 1.0
    beta = pf_to_beta(min(pf, 1.0))
    return PfEstimate(pf, beta, n_fail, se, degenerate)


def run_monte_carlo(ls, transform, plan, workers=None):
    if plan.method is not Method.MONTE_CARLO:
        raise ValueError("plan is not a Monte Carlo plan")
    batch = _draw(ls, transform, plan, workers)
    return batch, _estimate(batch)


def run_importance_sampling(ls, transform, plan, workers=None):
    """Sample N(is_center, is_cov) and reweight by f0 / f_IS; Pf = sum(w I) / N."""
    if plan.method is not Method.IMPORTANCE_SAMPLING:
        raise ValueError("plan is not an importance sampling plan")
    batch = _draw(ls, transform, plan, workers)
    return batch, _estimate(batch)


def run(ls, transform, plan, workers=None):
    if plan.method is Method.MONTE_CARLO:
        return run_monte_carlo(ls, transform, plan, workers)
    return run_importance_sampling(ls, transform, plan, workers)


def export_samples_csv(batch, path, names=None):
    """Write one row per sample: u coordinates, g, weight and failure flag."""
    names = list(names) if names is not None else [f"u{i + 1}" for i in range(batch.dim)]
    w = batch.weights
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow([f"u_{n}" for n in names] + ["g", "weight", "failed"])
        for row, g, wi in zip(batch.u, batch.g, w):
            out.writerow([repr(float(v)) for v in row] + [repr(float(g)), repr(float(wi)), int(g <= 0.0)])
