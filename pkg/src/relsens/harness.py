"""Repeated-run studies: mean and standard deviation of beta and the indices.

Run ``r`` of a study uses seed ``base_seed + r``. All variance steps of one
(method, N) pair are evaluated on the same sample batch per run, since the
sensitivities are a post-processing step on existing samples.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AllSafe, ReliabilityError, StudyError
from .sampling import Method, SamplingPlan, default_workers, run
from .sensitivity import DEFAULT_DELTA_VAR, reliability_sensitivities


@dataclass(frozen=True)
class Model:
    transform: object
    limit_state: object
    names: tuple

    @property
    def dim(self):
        return len(self.names)


@dataclass
class StudyConfig:
    model: Model
    methods: Sequence[SamplingPlan]  # seeds in the templates are ignored
    delta_vars: Sequence[float] = (DEFAULT_DELTA_VAR,)
    runs: int = 100
    base_seed: int = 0
    workers: Optional[int] = None

    def __post_init__(self):
        if int(self.runs) < 1:
            raise ValueError("runs must be at least 1")
        if not self.methods:
            raise ValueError("at least one sampling plan is required")


@dataclass(frozen=True)
class StudyRow:
    method: str
    n_samples: int
    delta_var: float
    runs: int
    beta_mean: float
    beta_std: Optional[float]
    index_mean: tuple
    index_std: Optional[tuple]
    pf_mean: float = math.nan


@dataclass
class StudySummary:
    names: tuple
    rows: list = field(default_factory=list)
    wall_time: float = 0.0

    def row(self, method, n_samples, delta_var=DEFAULT_DELTA_VAR):
        method = Method.parse(method).value
        for r in self.rows:
            if r.method == method and r.n_samples == n_samples and math.isclose(r.delta_var, delta_var):
                return r
        raise KeyError((method, n_samples, delta_var))


@dataclass(frozen=True)
class RunRecord:
    method: str
    n_samples: int
    delta_var: float
    run: int
    pf_hat: float
    beta_hat: float
    indices: np.ndarray


def _one_run(model, plan, delta_vars, run_index, seed):
    try:
        batch, est = run(model.limit_state, model.transform, plan.with_seed(seed), workers=1)
        out = []
        for dv in delta_vars:
            sens = reliability_sensitivities(batch, dv)
            if sens.all_safe:
                raise AllSafe(f"no failures among {plan.n_samples} samples")
            out.append(RunRecord(plan.method.value, plan.n_samples, float(dv), run_index,
                                 est.pf_hat, est.beta_hat, sens.indices))
        return out
    except ReliabilityError as exc:
        raise StudyError(run_index, exc) from exc


def run_records(cfg):
    """Every per-run record of the study, in (plan, run, delta_var) order."""
    workers = cfg.workers or default_workers()
    jobs = [(plan, r) for plan in cfg.methods for r in range(cfg.runs)]

    def job(item):
        plan, r = item
        return _one_run(cfg.model, plan, cfg.delta_vars, r, cfg.base_seed + r)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(job, jobs))
    else:
        parts = [job(j) for j in jobs]
    return [rec for part in parts for rec in part]


def _std(values):
    return float(np.std(values, ddof=1)) if len(values) > 1 else None


def summarize(records, names):
    groups = {}
    for rec in records:
        groups.setdefault((rec.method, rec.n_samples, rec.delta_var), []).append(rec)
    summary = StudySummary(tuple(names))
    for (method, n, dv), recs in groups.items():
        recs.sort(key=lambda r: r.run)
        betas = np.array([r.beta_hat for r in recs])
        idx = np.array([r.indices for r in recs])
        pfs = np.array([r.pf_hat for r in recs])
        std_idx = np.std(idx, axis=0, ddof=1) if len(recs) > 1 else None
        summary.rows.append(StudyRow(
            method=method,
            n_samples=n,
            delta_var=dv,
            runs=len(recs),
            beta_mean=float(betas.mean()),
            beta_std=_std(betas),
            index_mean=tuple(float(v) for v in idx.mean(axis=0)),
            index_std=None if std_idx is None else tuple(float(v) for v in std_idx),
            pf_mean=float(pfs.mean()),
        ))
    return summary


def run_study(cfg):
    t0 = time.perf_counter()
    records = run_records(cfg)
    summary = summarize(records, cfg.model.names)
    summary.wall_time = time.perf_counter() - t0
    return summary
