"""JSON analysis configuration: parsing and validation.

Example::

    {
      "variables": [
        {"name": "N_load", "distribution": "normal", "mean": 200, "std": 60},
        {"name": "phi", "distribution": "lognormal", "mean": 20, "std": 4}
      ],
      "correlation": [{"pair": ["N_load", "phi"], "rho": 0.2}],
      "limit_state": {"type": "expression", "text": "...", "bindings": {...}},
      "analysis": {"method": "is", "n_samples": 1000, "seed": 0,
                   "delta_var": 0.1, "runs": 100, "is_center": "form"}
    }

Errors are raised as :class:`ConfigError` carrying a dotted field path and,
where it can be located, the line in the file.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import distributions, limit_state, transform
from .errors import ConfigError, ParseError, ReliabilityError
from .harness import Model
from .sampling import Method
from .sensitivity import DEFAULT_DELTA_VAR

TERZAGHI_ROLES = ("load", "friction_angle", "cohesion", "unit_weight")


@dataclass
class Analysis:
    methods: list = field(default_factory=lambda: [Method.MONTE_CARLO])
    n_samples: list = field(default_factory=lambda: [10000])
    seed: int = 0
    delta_vars: list = field(default_factory=lambda: [DEFAULT_DELTA_VAR])
    runs: int = 1
    is_center: object = "form"  # "form" or a vector in the standard normal space


@dataclass
class AnalysisConfig:
    model: Model
    analysis: Analysis
    source: Optional[str] = None


class _Ctx:
    def __init__(self, text):
        self.text = text or ""

    def line_of(self, *needles, nth=1):
        for needle in needles:
            if needle is None:
                continue
            pos = -1
            for _ in range(nth):
                pos = self.text.find(needle, pos + 1)
                if pos < 0:
                    break
            if pos >= 0:
                return self.text.count("\n", 0, pos) + 1
        return None

    def fail(self, path, message, key=None, value=None, nth=1):
        needles = []
        if key is not None and value is not None:
            needles.append(f'"{key}": {json.dumps(value)}')
        if value is not None:
            needles.append(json.dumps(value))
        if key is not None:
            needles.append(f'"{key}"')
        raise ConfigError(path, message, self.line_of(*needles, nth=nth))


def _number(ctx, obj, key, path, *, required=True, default=None, positive=False):
    if key not in obj:
        if required:
            ctx.fail(f"{path}.{key}", "missing required field", key)
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        ctx.fail(f"{path}.{key}", f"expected a finite number, got {v!r}", key, v)
    if positive and v <= 0:
        ctx.fail(f"{path}.{key}", f"must be positive, got {v!r}", key, v)
    return float(v)


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _variables(ctx, data):
    items = data.get("variables")
    if not isinstance(items, list) or not items:
        ctx.fail("variables", "expected a non-empty list of variables", "variables")
    names, marginals = [], []
    for i, item in enumerate(items):
        path = f"variables[{i}]"
        if not isinstance(item, dict):
            ctx.fail(path, "expected an object")
        name = item.get("name")
        if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
            ctx.fail(f"{path}.name", f"expected an identifier, got {name!r}", "name", name)
        if name in names:
            ctx.fail(f"{path}.name", f"duplicate variable name {name!r}", "name", name, nth=2)
        kind = item.get("distribution", "normal")
        try:
            kind = distributions.Kind.parse(kind)
        except ReliabilityError:
            ctx.fail(f"{path}.distribution", f"unknown distribution {kind!r}", "distribution", kind)
        mean = _number(ctx, item, "mean", path)
        std = _number(ctx, item, "std", path, positive=True)
        lower = _number(ctx, item, "lower", path, required=False, default=-math.inf)
        upper = _number(ctx, item, "upper", path, required=False, default=math.inf)
        try:
            marginals.append(distributions.from_moments(kind, mean, std, lower, upper))
        except ReliabilityError as exc:
            ctx.fail(path, str(exc), "name", name)
        names.append(name)
    return names, marginals


def _correlation(ctx, data, names):
    m = len(names)
    rho = np.eye(m)
    for i, item in enumerate(data.get("correlation") or []):
        path = f"correlation[{i}]"
        pair = item.get("pair") if isinstance(item, dict) else None
        if not (isinstance(pair, list) and len(pair) == 2):
            ctx.fail(f"{path}.pair", "expected a pair of variable names", "pair")
        for p in pair:
            if p not in names:
                ctx.fail(f"{path}.pair", f"unknown variable {p!r}", "pair", p)
        a, b = names.index(pair[0]), names.index(pair[1])
        if a == b:
            ctx.fail(f"{path}.pair", "a variable cannot be correlated with itself", "pair")
        r = _number(ctx, item, "rho", path)
        if not -1.0 < r < 1.0:
            ctx.fail(f"{path}.rho", "correlation must lie strictly between -1 and 1", "rho", item["rho"])
        rho[a, b] = rho[b, a] = r
    return rho


def _permuted(ls, perm, names):
    base = ls.evaluator

    def g(x):
        return base(x[:, perm])

    return limit_state.LimitState(g, tuple(names), None, ls.description, ls.strict_point)


def _limit_state(ctx, data, names):
    section = data.get("limit_state")
    path = "limit_state"
    if not isinstance(section, dict):
        ctx.fail(path, "missing limit_state object", "limit_state")
    kind = section.get("type")
    if kind == "linear":
        a0 = _number(ctx, section, "a0", path)
        coeffs = section.get("coefficients")
        if isinstance(coeffs, dict):
            for k in coeffs:
                if k not in names:
                    ctx.fail(f"{path}.coefficients.{k}", f"unknown variable {k!r}", k)
            a = [float(coeffs.get(n, 0.0)) for n in names]
        elif isinstance(coeffs, list) and len(coeffs) == len(names):
            a = [float(c) for c in coeffs]
        else:
            ctx.fail(f"{path}.coefficients", "expected an object keyed by variable name "
                     "or a list with one entry per variable", "coefficients")
        return limit_state.linear(a0, a, names)
    if kind == "terzaghi":
        b = _number(ctx, section, "b", path, positive=True)
        d = _number(ctx, section, "d", path)
        if d < 0:
            ctx.fail(f"{path}.d", "footing depth must be non-negative", "d")
        defaults = dict(zip(TERZAGHI_ROLES, ("N_load", "phi", "c", "gamma_s")))
        bindings = dict(defaults, **(section.get("bindings") or {}))
        for role in bindings:
            if role not in TERZAGHI_ROLES:
                ctx.fail(f"{path}.bindings.{role}", f"unknown role; expected one of {TERZAGHI_ROLES}", role)
        if len(names) != 4:
            ctx.fail("variables", "the terzaghi limit state needs exactly four variables", "variables")
        perm = []
        for role in TERZAGHI_ROLES:
            var = bindings[role]
            if var not in names:
                ctx.fail(f"{path}.bindings.{role}", f"unbound or unknown variable {var!r}", role, var)
            perm.append(names.index(var))
        if len(set(perm)) != 4:
            ctx.fail(f"{path}.bindings", "each role needs its own variable", "bindings")
        return _permuted(limit_state.terzaghi_bearing(b, d), perm, names)
    if kind == "expression":
        text = section.get("text")
        if not isinstance(text, str) or not text.strip():
            ctx.fail(f"{path}.text", "expected a non-empty expression", "text")
        bindings = section.get("bindings") or {}
        for ident, var in bindings.items():
            if var not in names:
                ctx.fail(f"{path}.bindings.{ident}", f"unknown variable {var!r}", ident, var)
        idents = [k for k in bindings]
        perm = [names.index(bindings[k]) for k in idents]
        for n in names:
            if n not in bindings.values() and n not in idents:
                idents.append(n)
                perm.append(names.index(n))
        constants = section.get("constants") or {}
        for k, v in constants.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                ctx.fail(f"{path}.constants.{k}", "constants must be numbers", k)
        try:
            ls = limit_state.parse_expression(text, idents, constants)
        except ParseError as exc:
            ctx.fail(f"{path}.text", str(exc), "text")
        return _permuted(ls, perm, names)
    ctx.fail(f"{path}.type", f"unknown limit-state type {kind!r}; expected linear, terzaghi or expression",
             "type", kind)


def _analysis(ctx, data, m):
    section = data.get("analysis") or {}
    path = "analysis"
    out = Analysis()
    if "method" in section:
        try:
            out.methods = [Method.parse(v) for v in _as_list(section["method"])]
        except ValueError:
            ctx.fail(f"{path}.method", f"unknown method {section['method']!r}; expected mcs or is",
                     "method", section["method"])
    if "n_samples" in section:
        ns = _as_list(section["n_samples"])
        if not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in ns):
            ctx.fail(f"{path}.n_samples", "expected positive integer(s)", "n_samples")
        out.n_samples = ns
    if "seed" in section:
        s = section["seed"]
        if not isinstance(s, int) or isinstance(s, bool) or s < 0:
            ctx.fail(f"{path}.seed", "expected a non-negative integer", "seed", s)
        out.seed = s
    if "delta_var" in section:
        dvs = _as_list(section["delta_var"])
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 for v in dvs):
            ctx.fail(f"{path}.delta_var", "expected positive number(s)", "delta_var")
        out.delta_vars = [float(v) for v in dvs]
    if "runs" in section:
        r = section["runs"]
        if not isinstance(r, int) or isinstance(r, bool) or r < 1:
            ctx.fail(f"{path}.runs", "expected a positive integer", "runs", r)
        out.runs = r
    if "is_center" in section:
        c = section["is_center"]
        if c == "form":
            out.is_center = "form"
        elif isinstance(c, list) and len(c) == m and all(isinstance(v, (int, float)) for v in c):
            out.is_center = np.array(c, dtype=float)
        else:
            ctx.fail(f"{path}.is_center", f"expected \"form\" or a list of {m} numbers", "is_center")
    return out


def parse_config(data, text=None, source=None):
    ctx = _Ctx(text)
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    names, marginals = _variables(ctx, data)
    rho = _correlation(ctx, data, names)
    ls = _limit_state(ctx, data, names)
    analysis = _analysis(ctx, data, len(names))
    try:
        t = transform.build(marginals, rho)
    except ReliabilityError as exc:
        raise ConfigError("correlation", str(exc), ctx.line_of('"correlation"')) from exc
    return AnalysisConfig(Model(t, ls, tuple(names)), analysis, source)


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", exc.msg + f" (column {exc.colno})", exc.lineno) from exc
    return parse_config(data, text, str(path))
