"""First Order Reliability Method.

Sign conventions: ``alpha`` is the unit vector from the origin towards the
design point in the independent standard normal space, so
``u_star = beta * alpha`` and ``alpha = -grad g / |grad g|`` at the design
point. For a linear g this makes ``alpha`` proportional to ``-a_i sigma_i``;
the indices only use ``alpha_i**2`` and are unaffected by the sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import std_normal_cdf, std_normal_pdf
from .errors import DegenerateVariance, GradientFailure, NoConvergence, ZeroVector


@dataclass(frozen=True)
class FormResult:
    beta: float
    pf: float
    u_star: np.ndarray
    alpha: np.ndarray
    converged: bool
    iterations: int
    g_evaluations: int = 0

    @property
    def indices(self):
        return alpha_to_linear_indices(self.alpha)


def _linear_moments(a0, a, means, stds):
    a = np.asarray(a, dtype=float)
    means = np.asarray(means, dtype=float)
    stds = np.asarray(stds, dtype=float)
    if np.any(stds <= 0):
        raise DegenerateVariance("standard deviations must be positive")
    g_mean = float(a0) + float(a @ means)
    g_var = float(np.sum(a * a * stds * stds))
    if g_var <= 0.0:
        raise DegenerateVariance("limit state has zero variance")
    return a, stds, g_mean, g_var


def linear_form_analytic(a0, a, means, stds):
    """Exact FORM solution of g = a0 + sum a_i X_i with independent normal X_i."""
    a, stds, g_mean, g_var = _linear_moments(a0, a, means, stds)
    beta = g_mean / math.sqrt(g_var)
    scaled = a * stds
    alpha = -scaled / np.linalg.norm(scaled)
    return FormResult(
        beta=beta,
        pf=float(std_normal_cdf(-beta)),
        u_star=beta * alpha,
        alpha=alpha,
        converged=True,
        iterations=0,
    )


def linear_variance_derivatives(a0, a, means, stds):
    """d(beta)/d(sigma_i^2) and d(Pf)/d(sigma_i^2) for the linear-normal case.

    From beta = g_mean / sqrt(g_var) and g_var = sum a_j^2 sigma_j^2:
    d(beta) = -beta a_i^2 / (2 g_var), d(Pf) = phi(beta) beta a_i^2 / (2 g_var).
    """
    a, stds, g_mean, g_var = _linear_moments(a0, a, means, stds)
    beta = g_mean / math.sqrt(g_var)
    share = a * a / g_var
    dbeta = -0.5 * beta * share
    dpf = float(std_normal_pdf(beta)) * 0.5 * beta * share
    return dbeta, dpf


def alpha_to_linear_indices(alpha):
    """alpha_i^2 / sum_j alpha_j^2."""
    sq = np.square(np.asarray(alpha, dtype=float))
    total = sq.sum()
    if not total > 0.0:
        raise ZeroVector("alpha must be non-zero")
    return sq / total


def analytic_dpf_dvar(beta, alpha):
    """dPf/d(sigma_Ui^2) at unit variances for a limit state linear in u.

    With g(u) = beta * |alpha| - alpha . u this is
    phi(beta) * beta / 2 * alpha_i^2 / sum alpha_j^2.
    """
    shares = alpha_to_linear_indices(alpha)
    return float(std_normal_pdf(beta)) * 0.5 * float(beta) * shares


@dataclass(frozen=True)
class FormOptions:
    tol: float = 1e-6
    max_iter: int = 100
    step: float = 1e-5  # central-difference step in u-space
    armijo: float = 0.1
    max_halvings: int = 30


def _make_g_u(ls, transform):
    def g_u(us):
        return ls(transform.u_to_x(np.atleast_2d(us)))

    return g_u


def _gradient(g_u, u, h):
    m = u.size
    pts = np.concatenate([u + h * np.eye(m), u - h * np.eye(m)])
    vals = g_u(pts)
    grad = (vals[:m] - vals[m:]) / (2.0 * h)
    if not np.all(np.isfinite(grad)):
        raise GradientFailure(f"non-finite limit-state gradient at u = {u.tolist()}")
    return grad


def form_search(ls, transform, opts=None, u0=None):
    """Design-point search by HLRF with a merit-function line search (iHLRF)."""
    opts = opts or FormOptions()
    g_u = _make_g_u(ls, transform)
    m = transform.dim
    u = np.zeros(m) if u0 is None else np.array(u0, dtype=float)
    g0 = float(g_u(np.zeros(m))[0])
    if not math.isfinite(g0):
        raise GradientFailure("limit state is not finite at the median point")
    g_scale = abs(g0) if g0 != 0.0 else 1.0
    g = float(g_u(u)[0])
    n_eval = 2
    for it in range(1, opts.max_iter + 1):
        grad = _gradient(g_u, u, opts.step)
        n_eval += 2 * m
        gnorm = float(np.linalg.norm(grad))
        if gnorm == 0.0:
            raise GradientFailure(f"zero limit-state gradient at u = {u.tolist()}")
        target = ((grad @ u - g) / gnorm**2) * grad
        d = target - u
        # merit m(u) = |u|^2 / 2 + c |g|; c large enough that d is a descent direction
        c = float(np.linalg.norm(u)) / gnorm
        if abs(g) > 1e-12 * g_scale:
            c = max(c, 0.5 * float(target @ target) / abs(g))
        c *= 2.0
        merit = 0.5 * float(u @ u) + c * abs(g)
        slope = float((u + c * math.copysign(1.0, g) * grad) @ d)
        lam = 1.0
        for _ in range(opts.max_halvings):
            u_new = u + lam * d
            g_new = float(g_u(u_new)[0])
            n_eval += 1
            if math.isfinite(g_new) and (
                0.5 * float(u_new @ u_new) + c * abs(g_new) <= merit + opts.armijo * lam * slope
            ):
                break
            lam *= 0.5
        if not math.isfinite(g_new):
            raise GradientFailure(f"limit state not finite along the search direction at iteration {it}")
        step = float(np.linalg.norm(u_new - u))
        u, g = u_new, g_new
        if step < opts.tol and abs(g) < opts.tol * g_scale:
            grad = _gradient(g_u, u, opts.step)
            n_eval += 2 * m
            alpha = -grad / np.linalg.norm(grad)
            beta = math.copysign(float(np.linalg.norm(u)), g0)
            return FormResult(
                beta=beta,
                pf=float(std_normal_cdf(-beta)),
                u_star=u,
                alpha=alpha,
                converged=True,
                iterations=it,
                g_evaluations=n_eval,
            )
    raise NoConvergence(f"FORM did not converge in {opts.max_iter} iterations")
