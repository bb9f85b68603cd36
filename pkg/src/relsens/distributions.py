"""Univariate marginal distributions parameterized by their first two moments.

All evaluation methods accept scalars or numpy arrays and are vectorized.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError, InvalidMoments, InvalidProbability

SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation to the normal quantile (|rel err| < 1.15e-9)
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / SQRT2PI


def std_normal_cdf(x):
    """Phi(x), accurate to full relative precision in the lower tail."""
    return special.ndtr(np.asarray(x, dtype=float))


def _acklam(p):
    """Rational approximation for p in (0, 0.5]."""
    x = np.empty_like(p)
    tail = p < _P_LOW
    if tail.any():
        q = np.sqrt(-2.0 * np.log(p[tail]))
        c, d = _C, _D
        x[tail] = ((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
                   / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0))
    mid = ~tail
    if mid.any():
        q = p[mid] - 0.5
        r = q * q
        a, b = _A, _B
        x[mid] = ((((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
                  / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0))
    return x


def std_normal_quantile(p):
    """Inverse of Phi for p in the open interval (0, 1).

    Works on min(p, 1-p) so the lower-tail branch carries full relative
    precision, then applies one Halley correction against ``std_normal_cdf``.
    """
    p = np.asarray(p, dtype=float)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    if not np.all((p > 0.0) & (p < 1.0)):
        raise InvalidProbability("probability must lie strictly inside (0, 1)")
    upper = p > 0.5
    lo = np.where(upper, 1.0 - p, p)
    x = _acklam(lo)
    err = special.ndtr(x) - lo
    u = err * SQRT2PI * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    x = np.where(upper, -x, x)
    return x[0] if scalar else x


class Kind(str, enum.Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"
    UNIFORM = "uniform"
    TRUNCATED_NORMAL = "truncated_normal"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"truncnormal": "truncated_normal", "truncated": "truncated_normal",
                   "log_normal": "lognormal", "gaussian": "normal"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise InvalidMoments(f"unknown distribution kind {text!r}") from None


@dataclass(frozen=True)
class MarginalDistribution:
    """A marginal defined by ``kind`` and its mean and standard deviation.

    For ``TRUNCATED_NORMAL`` the moments describe the parent normal before
    truncation to ``[lower, upper]``; the realised moments are available from
    :meth:`moments`.
    """

    kind: Kind
    mean: float
    std_dev: float
    lower: float = -math.inf
    upper: float = math.inf
    _p: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        kind = Kind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        mean, std = float(self.mean), float(self.std_dev)
        if not (math.isfinite(mean) and math.isfinite(std)) or std <= 0.0:
            raise InvalidMoments(f"std_dev must be positive and finite, got {self.std_dev!r}")
        if kind is Kind.NORMAL:
            params = (mean, std)
        elif kind is Kind.LOGNORMAL:
            if mean <= 0.0:
                raise InvalidMoments("lognormal requires a positive mean")
            zeta = math.sqrt(math.log1p((std / mean) ** 2))
            params = (math.log(mean) - 0.5 * zeta * zeta, zeta)
        elif kind is Kind.UNIFORM:
            half = math.sqrt(3.0) * std
            params = (mean - half, mean + half)
        else:
            lo, hi = float(self.lower), float(self.upper)
            if not lo < hi:
                raise InvalidMoments("truncation bounds must satisfy lower < upper")
            a, b = (lo - mean) / std, (hi - mean) / std
            mass = float(special.ndtr(b) - special.ndtr(a)) if a < 0 else float(special.ndtr(-a) - special.ndtr(-b))
            if mass <= 0.0:
                raise InvalidMoments("truncation interval carries no probability mass")
            params = (mean, std, a, b, mass)
        object.__setattr__(self, "_p", params)

    @property
    def lam(self):
        """Log-space mean of a lognormal marginal."""
        return self._p[0]

    @property
    def zeta(self):
        """Log-space standard deviation of a lognormal marginal."""
        return self._p[1]

    def support(self):
        if self.kind is Kind.NORMAL:
            return -math.inf, math.inf
        if self.kind is Kind.LOGNORMAL:
            return 0.0, math.inf
        if self.kind is Kind.UNIFORM:
            return self._p
        return self.lower, self.upper

    def moments(self):
        """Mean and standard deviation of the distribution as realised."""
        if self.kind is not Kind.TRUNCATED_NORMAL:
            return self.mean, self.std_dev
        mu, s, a, b, mass = self._p
        pa, pb = float(std_normal_pdf(a)), float(std_normal_pdf(b))
        ta = a * pa if math.isfinite(a) else 0.0
        tb = b * pb if math.isfinite(b) else 0.0
        m = mu + s * (pa - pb) / mass
        var = s * s * (1.0 + (ta - tb) / mass - ((pa - pb) / mass) ** 2)
        return m, math.sqrt(var)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        k = self.kind
        with np.errstate(divide="ignore", invalid="ignore"):
            if k is Kind.NORMAL:
                mu, s = self._p
                out = std_normal_pdf((x - mu) / s) / s
            elif k is Kind.LOGNORMAL:
                lam, zeta = self._p
                pos = x > 0
                xs = np.where(pos, x, 1.0)
                out = np.where(pos, std_normal_pdf((np.log(xs) - lam) / zeta) / (zeta * xs), 0.0)
            elif k is Kind.UNIFORM:
                a, b = self._p
                out = np.where((x >= a) & (x <= b), 1.0 / (b - a), 0.0)
            else:
                mu, s, _, _, mass = self._p
                inside = (x >= self.lower) & (x <= self.upper)
                out = np.where(inside, std_normal_pdf((x - mu) / s) / (s * mass), 0.0)
        return out[()] if out.ndim == 0 else out

    def cdf(self, x):
        """CDF; clamps to 0 or 1 outside the support."""
        x = np.asarray(x, dtype=float)
        k = self.kind
        with np.errstate(divide="ignore", invalid="ignore"):
            if k is Kind.NORMAL:
                mu, s = self._p
                out = special.ndtr((x - mu) / s)
            elif k is Kind.LOGNORMAL:
                lam, zeta = self._p
                pos = x > 0
                out = np.where(pos, special.ndtr((np.log(np.where(pos, x, 1.0)) - lam) / zeta), 0.0)
            elif k is Kind.UNIFORM:
                a, b = self._p
                out = np.clip((x - a) / (b - a), 0.0, 1.0)
            else:
                mu, s, a, b, mass = self._p
                t = np.clip((x - mu) / s, a, b)
                if a < 0:
                    out = (special.ndtr(t) - special.ndtr(a)) / mass
                else:
                    out = (special.ndtr(-a) - special.ndtr(-t)) / mass
                out = np.clip(out, 0.0, 1.0)
        return out[()] if out.ndim == 0 else out

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if not np.all((p > 0.0) & (p < 1.0)):
            raise InvalidProbability("probability must lie strictly inside (0, 1)")
        k = self.kind
        if k is Kind.NORMAL:
            mu, s = self._p
            out = mu + s * std_normal_quantile(p)
        elif k is Kind.LOGNORMAL:
            lam, zeta = self._p
            out = np.exp(lam + zeta * std_normal_quantile(p))
        elif k is Kind.UNIFORM:
            a, b = self._p
            out = a + (b - a) * p
        else:
            out = self._truncated_quantile(p)
        out = np.asarray(out)
        return out[()] if out.ndim == 0 else out

    def _truncated_quantile(self, p):
        mu, s, a, b, mass = self._p
        if a < 0:
            q = special.ndtr(a) + p * mass
            q = np.clip(q, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
            t = std_normal_quantile(q)
        else:
            # both bounds in the upper tail: work with survival probabilities
            q = special.ndtr(-a) - p * mass
            q = np.clip(q, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
            t = -std_normal_quantile(q)
        return mu + s * np.clip(t, a, b)

    # mapping to and from the standard normal space
    def from_standard_normal(self, z):
        """x = F^-1(Phi(z)), computed without the round trip where possible."""
        z = np.asarray(z, dtype=float)
        if self.kind is Kind.NORMAL:
            mu, s = self._p
            return mu + s * z
        if self.kind is Kind.LOGNORMAL:
            lam, zeta = self._p
            return np.exp(lam + zeta * z)
        # quantile needs p strictly inside (0, 1); clamp deep tails that round off
        p = np.clip(special.ndtr(z), np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
        return self.quantile(p)

    def to_standard_normal(self, x):
        """z = Phi^-1(F(x)); raises DomainError outside the support."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.support()
        open_lo = self.kind is Kind.LOGNORMAL
        bad = ~np.isfinite(x) | (x < lo) | (x > hi)
        if open_lo:
            bad |= x <= lo
        if np.any(bad):
            raise DomainError(f"value outside the support {self.support()} of {self.kind.value}")
        if self.kind is Kind.NORMAL:
            mu, s = self._p
            return (x - mu) / s
        if self.kind is Kind.LOGNORMAL:
            lam, zeta = self._p
            return (np.log(x) - lam) / zeta
        p = np.clip(self.cdf(x), np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
        return std_normal_quantile(p)


def from_moments(kind, mean, std_dev, lower=-math.inf, upper=math.inf):
    """Build a marginal from its mean and standard deviation."""
    return MarginalDistribution(Kind.parse(kind), mean, std_dev, lower, upper)


def normal(mean=0.0, std_dev=1.0):
    return from_moments(Kind.NORMAL, mean, std_dev)


def lognormal(mean, std_dev):
    return from_moments(Kind.LOGNORMAL, mean, std_dev)


def uniform(mean, std_dev):
    return from_moments(Kind.UNIFORM, mean, std_dev)


def truncated_normal(mean, std_dev, lower=-math.inf, upper=math.inf):
    return from_moments(Kind.TRUNCATED_NORMAL, mean, std_dev, lower, upper)
