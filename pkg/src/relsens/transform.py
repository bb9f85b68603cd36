"""Nataf joint model and zero-mean Gaussian densities.

Three coordinate systems appear here:

* ``x`` -- physical space, one marginal per coordinate;
* ``z`` -- correlated standard normal space, ``z ~ N(0, rho_u)``; this is the
  space the sampling and sensitivity modules work in;
* ``u`` -- independent standard normal space, ``z = chol_u @ u``; FORM
  searches for the design point here.

When the inputs are independent ``rho_u`` is the identity and ``z == u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import linalg, optimize

from .distributions import MarginalDistribution
from .errors import NoConvergence, NotPositiveDefinite

LOG2PI = math.log(2.0 * math.pi)
GH_NODES = 32


def cholesky(cov):
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise NotPositiveDefinite("covariance must be a square matrix")
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
        raise NotPositiveDefinite("covariance must be symmetric")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("matrix is not positive definite") from None


class ZeroMeanGaussian:
    """N(0, cov) with its Cholesky factor computed once and reused."""

    def __init__(self, cov):
        self.cov = np.array(cov, dtype=float)
        self.chol = cholesky(self.cov)
        self.dim = self.cov.shape[0]
        self.log_det = 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    def logpdf(self, u):
        u = np.asarray(u, dtype=float)
        single = u.ndim == 1
        pts = np.atleast_2d(u)
        if pts.shape[1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {pts.shape[1]}")
        w = linalg.solve_triangular(self.chol, pts.T, lower=True, check_finite=False)
        out = -0.5 * (self.dim * LOG2PI + self.log_det + np.einsum("ij,ij->j", w, w))
        return out[0] if single else out

    def pdf(self, u):
        return np.exp(self.logpdf(u))


def joint_normal_logpdf(cov, u):
    return ZeroMeanGaussian(cov).logpdf(u)


def joint_normal_pdf(cov, u):
    """(2 pi)^(-m/2) |cov|^(-1/2) exp(-u' cov^-1 u / 2) for one point or a stack."""
    return np.exp(joint_normal_logpdf(cov, u))


def _gh_rule(n):
    z, w = hermegauss(n)
    return z, w / math.sqrt(2.0 * math.pi)


def _standardized(marginal, z):
    x = marginal.from_standard_normal(z)
    mean, std = marginal.moments()
    return (x - mean) / std


def nataf_correlation(mi, mj, rho_z, nodes=GH_NODES):
    """Physical-space correlation of (X_i, X_j) under a Gaussian copula with ``rho_z``."""
    z, w = _gh_rule(nodes)
    z1 = z[:, None]
    z2 = rho_z * z1 + math.sqrt(max(0.0, 1.0 - rho_z * rho_z)) * z[None, :]
    xi = _standardized(mi, z1)
    xj = _standardized(mj, z2)
    # normalise by the quadrature moments so that rho_z = 1 maps to exactly 1
    mi_q = np.sum(w * _standardized(mi, z))
    si_q = math.sqrt(np.sum(w * (_standardized(mi, z) - mi_q) ** 2))
    mj_q = np.sum(w * _standardized(mj, z))
    sj_q = math.sqrt(np.sum(w * (_standardized(mj, z) - mj_q) ** 2))
    cov = np.sum(w[:, None] * w[None, :] * (xi - mi_q) * (xj - mj_q))
    return float(cov / (si_q * sj_q))


def adjust_correlation(mi, mj, rho_x, nodes=GH_NODES, xtol=1e-13):
    """Solve nataf_correlation(mi, mj, r) = rho_x for r."""
    if rho_x == 0.0:
        return 0.0
    lim = 1.0 - 1e-12

    def f(r):
        return nataf_correlation(mi, mj, r, nodes) - rho_x

    lo, hi = (0.0, lim) if rho_x > 0 else (-lim, 0.0)
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise NoConvergence(
            f"target correlation {rho_x} is not attainable for these marginals"
        )
    try:
        return optimize.brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    except RuntimeError as exc:
        raise NoConvergence(str(exc)) from None


@dataclass(frozen=True, eq=False)
class NatafTransform:
    marginals: tuple
    rho_x: np.ndarray
    rho_u: np.ndarray
    chol_u: np.ndarray

    @property
    def dim(self):
        return len(self.marginals)

    @cached_property
    def base_density(self):
        """Density of the correlated standard normal space, N(0, rho_u)."""
        return ZeroMeanGaussian(self.rho_u)

    def u_to_z(self, u):
        u = np.asarray(u, dtype=float)
        return u @ self.chol_u.T

    def z_to_u(self, z):
        z = np.asarray(z, dtype=float)
        sol = linalg.solve_triangular(self.chol_u, np.atleast_2d(z).T, lower=True)
        return sol.T[0] if z.ndim == 1 else sol.T

    def z_to_x(self, z):
        z = np.asarray(z, dtype=float)
        self._check_dim(z)
        cols = [m.from_standard_normal(z[..., i]) for i, m in enumerate(self.marginals)]
        return np.stack(cols, axis=-1)

    def x_to_z(self, x):
        x = np.asarray(x, dtype=float)
        self._check_dim(x)
        cols = [m.to_standard_normal(x[..., i]) for i, m in enumerate(self.marginals)]
        return np.stack(cols, axis=-1)

    def u_to_x(self, u):
        return self.z_to_x(self.u_to_z(u))

    def x_to_u(self, x):
        return self.z_to_u(self.x_to_z(x))

    def _check_dim(self, a):
        if a.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {a.shape[-1]}")


def build(marginals, rho_x=None, nodes=GH_NODES):
    """Assemble the Nataf model, adjusting each correlated pair in turn."""
    marginals = tuple(marginals)
    m = len(marginals)
    if m == 0:
        raise ValueError("at least one marginal is required")
    if not all(isinstance(d, MarginalDistribution) for d in marginals):
        raise TypeError("marginals must be MarginalDistribution instances")
    rho_x = np.eye(m) if rho_x is None else np.array(rho_x, dtype=float)
    if rho_x.shape != (m, m):
        raise NotPositiveDefinite(f"correlation matrix must be {m}x{m}")
    if not np.allclose(np.diag(rho_x), 1.0, rtol=0.0, atol=1e-12):
        raise NotPositiveDefinite("correlation matrix needs a unit diagonal")
    cholesky(rho_x)
    rho_u = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            r = rho_x[i, j]
            if r != 0.0:
                rho_u[i, j] = rho_u[j, i] = adjust_correlation(marginals[i], marginals[j], r, nodes)
    try:
        chol = cholesky(rho_u)
    except NotPositiveDefinite:
        raise NotPositiveDefinite("adjusted standard-normal correlation matrix is not positive definite") from None
    return NatafTransform(marginals, rho_x, rho_u, chol)


__all__ = [
    "NatafTransform",
    "ZeroMeanGaussian",
    "adjust_correlation",
    "build",
    "cholesky",
    "joint_normal_logpdf",
    "joint_normal_pdf",
    "nataf_correlation",
]
