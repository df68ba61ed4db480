"""Ordinary least squares with t-based inference and AIC stepwise selection.

AIC follows the convention used by R's ``step``/``extractAIC`` for linear
models, ``n * log(RSS / n) + 2 * k`` with ``k`` counting the intercept, so
stepwise selections agree with that tool.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg

INTERCEPT = "(Intercept)"
TIE_TOL = 1e-9


class RegressionError(ValueError):
    pass


class RankDeficiencyError(RegressionError):
    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        super().__init__(f"design matrix is rank deficient; collinear column(s): {', '.join(columns)}")


# -- Student-t tail probabilities ------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 10000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularised incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_pvalue(t: float, df: float) -> float:
    """Two-sided p-value of a Student-t statistic."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isnan(t):
        return 1.0
    if math.isinf(t):
        return 0.0
    return betainc_reg(df / 2.0, 0.5, df / (df + t * t))


# -- Design and fit containers -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Predictor columns (intercept implicit) and a response vector."""

    columns: np.ndarray
    response: np.ndarray
    names: tuple[str, ...]
    response_name: str = "y"

    def __post_init__(self):
        x = np.asarray(self.columns, dtype=np.float64)
        y = np.asarray(self.response, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1) if len(self.names) == 1 else x.reshape(y.size, -1)
        if x.shape != (y.size, len(self.names)):
            raise RegressionError(
                f"columns have shape {x.shape}, expected ({y.size}, {len(self.names)})"
            )
        if len(set(self.names)) != len(self.names) or INTERCEPT in self.names:
            raise RegressionError("predictor names must be unique and not the intercept")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise RegressionError("design contains non-finite values")
        if y.size <= len(self.names) + 1:
            raise RegressionError(
                f"{y.size} rows cannot support {len(self.names)} predictors plus intercept"
            )
        for j, name in enumerate(self.names):
            if np.ptp(x[:, j]) == 0:
                raise RegressionError(f"predictor {name!r} is constant")
        object.__setattr__(self, "columns", x)
        object.__setattr__(self, "response", y)
        object.__setattr__(self, "names", tuple(self.names))

    @classmethod
    def from_mapping(cls, data: Mapping[str, Sequence[float]], response: str,
                     predictors: Sequence[str]) -> "DesignMatrix":
        if response not in data:
            raise RegressionError(f"response column {response!r} not found")
        missing = [p for p in predictors if p not in data]
        if missing:
            raise RegressionError(f"predictor column(s) not found: {', '.join(missing)}")
        cols = np.column_stack([np.asarray(data[p], float) for p in predictors]) if predictors \
            else np.empty((len(data[response]), 0))
        return cls(cols, np.asarray(data[response], float), tuple(predictors), response)

    @property
    def n(self) -> int:
        return self.response.size

    def subset(self, names: Sequence[str]) -> "DesignMatrix":
        idx = [self.names.index(nm) for nm in names]
        return DesignMatrix(self.columns[:, idx], self.response, tuple(names), self.response_name)

    def with_intercept(self) -> np.ndarray:
        return np.column_stack([np.ones(self.n), self.columns])


@dataclass(frozen=True)
class Coefficient:
    name: str
    estimate: float
    se: float
    t: float
    p: float

    @property
    def stars(self) -> str:
        return significance_stars(self.p)


@dataclass(frozen=True, eq=False)
class FitResult:
    coefficients: tuple[Coefficient, ...]
    rss: float
    df_resid: int
    n: int
    predictors: tuple[str, ...]
    response_name: str
    fitted: np.ndarray = field(repr=False)
    cov_unscaled: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return len(self.coefficients)

    @property
    def aic(self) -> float:
        return aic(self)

    @property
    def perfect_fit(self) -> bool:
        """RSS is zero, so AIC is the -inf sentinel."""
        return self.rss == 0.0

    @property
    def sigma2(self) -> float:
        return self.rss / self.df_resid

    def coef(self, name: str) -> Coefficient:
        for c in self.coefficients:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def params(self) -> dict[str, float]:
        return {c.name: c.estimate for c in self.coefficients}

    def to_dict(self) -> dict:
        return {
            "response": self.response_name,
            "n": self.n,
            "df_resid": self.df_resid,
            "rss": self.rss,
            "aic": None if self.perfect_fit else self.aic,
            "aic_sentinel": self.perfect_fit,
            "coefficients": [
                {"name": c.name, "estimate": c.estimate, "se": c.se, "t": _jsonable(c.t),
                 "p": c.p, "stars": c.stars}
                for c in self.coefficients
            ],
        }


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


# -- Fitting ----------------------------------------------------------------------

RANK_TOL = 1e-10


def ols_fit(design: DesignMatrix) -> FitResult:
    """Least squares via column-pivoted QR on unit-norm columns."""
    x = design.with_intercept()
    y = design.response
    n, p = x.shape
    names = (INTERCEPT,) + design.names

    scale = np.linalg.norm(x, axis=0)
    q, r, perm = scipy.linalg.qr(x / scale, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > RANK_TOL * diag[0]))
    if rank < p:
        raise RankDeficiencyError([names[i] for i in perm[rank:]])

    beta_piv = scipy.linalg.solve_triangular(r, q.T @ y)
    r_inv = scipy.linalg.solve_triangular(r, np.eye(p))
    cov_piv = r_inv @ r_inv.T

    beta = np.empty(p)
    beta[perm] = beta_piv
    cov = np.empty((p, p))
    cov[np.ix_(perm, perm)] = cov_piv
    beta /= scale
    cov /= np.outer(scale, scale)

    fitted = x @ beta
    rss = float(np.sum((y - fitted) ** 2))
    df = n - p
    sigma2 = rss / df
    coefs = []
    for i in range(p):
        se = math.sqrt(sigma2 * cov[i, i])
        if se > 0:
            t = beta[i] / se
        else:
            t = math.nan if beta[i] == 0 else math.copysign(math.inf, beta[i])
        coefs.append(Coefficient(names[i], float(beta[i]), se, float(t), t_pvalue(t, df)))
    return FitResult(tuple(coefs), rss, df, n, design.names, design.response_name, fitted, cov)


def aic(fit: FitResult) -> float:
    """``n * ln(RSS / n) + 2 * k``; ``-inf`` when RSS is zero (see ``perfect_fit``)."""
    if fit.rss == 0.0:
        return -math.inf
    return fit.n * math.log(fit.rss / fit.n) + 2 * fit.k


# -- Stepwise selection ----------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    move: str  # "none", "drop" or "add"
    term: str | None
    aic: float


@dataclass(frozen=True)
class Step:
    predictors: tuple[str, ...]
    aic: float
    candidates: tuple[Candidate, ...]
    chosen: Candidate


@dataclass(frozen=True)
class StepwiseResult:
    fit: FitResult
    trace: tuple[Step, ...]
    initial_aic: float

    @property
    def selected(self) -> tuple[str, ...]:
        return self.fit.predictors

    def trace_dicts(self) -> list[dict]:
        return [
            {
                "predictors": list(s.predictors),
                "aic": _jsonable(s.aic),
                "candidates": [{"move": c.move, "term": c.term, "aic": _jsonable(c.aic)} for c in s.candidates],
                "chosen": {"move": s.chosen.move, "term": s.chosen.term},
            }
            for s in self.trace
        ]


def _pick(candidates: list[Candidate], order: Mapping[str, int]) -> Candidate:
    best = min(c.aic for c in candidates)
    tied = [c for c in candidates if c.move != "none" and c.aic <= best + TIE_TOL]
    if not tied:
        return next(c for c in candidates if c.move == "none")
    drops = [c for c in tied if c.move == "drop"]
    pool = drops or tied
    return max(pool, key=lambda c: order[c.term])


def stepwise_select(design: DesignMatrix, direction: str = "both") -> StepwiseResult:
    """Greedy AIC descent from the full model.

    Each round evaluates every single-term deletion (and, for ``"both"``,
    every re-addition of a dropped term), applies the move with the lowest
    AIC, and stops once no move lowers AIC. The intercept is always kept.
    Moves whose AIC ties within 1e-9 resolve to the term latest in column
    order, deletions first.
    """
    if direction not in ("backward", "both"):
        raise ValueError(f"direction must be 'backward' or 'both', got {direction!r}")
    order = {name: i for i, name in enumerate(design.names)}
    current = list(design.names)
    fit = ols_fit(design)
    initial = aic(fit)
    trace: list[Step] = []

    while True:
        current_aic = aic(fit)
        candidates = [Candidate("none", None, current_aic)]
        for term in current:
            kept = [t for t in current if t != term]
            candidates.append(Candidate("drop", term, aic(ols_fit(design.subset(kept)))))
        if direction == "both":
            for term in design.names:
                if term not in current:
                    added = sorted(current + [term], key=order.__getitem__)
                    candidates.append(Candidate("add", term, aic(ols_fit(design.subset(added)))))
        chosen = _pick(candidates, order)
        if chosen.move != "none" and not chosen.aic < current_aic - TIE_TOL:
            chosen = candidates[0]
        trace.append(Step(tuple(current), current_aic, tuple(candidates), chosen))
        if chosen.move == "none":
            break
        if chosen.move == "drop":
            current.remove(chosen.term)
        else:
            current = sorted(current + [chosen.term], key=order.__getitem__)
        fit = ols_fit(design.subset(current))

    return StepwiseResult(fit, tuple(trace), initial)


# -- Reporting ----------------------------------------------------------------------

def format_table(fit: FitResult, title: str | None = None) -> str:
    """Plain-text coefficient table: estimate, SE, t value, p-value, stars."""
    head = f"{'':<16}{'Estimate':>10}{'SE':>10}{'t value':>10}{'p-value':>10}"
    lines = [title] if title else []
    lines.append(head)
    for c in fit.coefficients:
        lines.append(
            f"{c.name:<16}{c.estimate:>10.3f}{c.se:>10.3f}{c.t:>10.3f}{c.p:>10.3f} {c.stars}".rstrip()
        )
    aic_text = "-inf (perfect fit)" if fit.perfect_fit else f"{fit.aic:.3f}"
    lines.append(f"n = {fit.n}, residual df = {fit.df_resid}, RSS = {fit.rss:.6g}, AIC = {aic_text}")
    lines.append("Signif. codes: *** p<0.001  ** p<0.01  * p<0.05")
    return "\n".join(lines)


def fit_report(result: FitResult | StepwiseResult) -> str:
    if isinstance(result, StepwiseResult):
        payload = result.fit.to_dict()
        payload["initial_aic"] = _jsonable(result.initial_aic)
        payload["selected"] = list(result.selected)
        payload["trace"] = result.trace_dicts()
    else:
        payload = result.to_dict()
    return json.dumps(payload, indent=2, allow_nan=False)


def _jsonable(value: float) -> float | str:
    return value if math.isfinite(value) else str(value)


def read_numeric_columns(rows: Iterable[Mapping[str, str]], columns: Sequence[str]) -> dict[str, list[float]]:
    out: dict[str, list[float]] = {c: [] for c in columns}
    for i, row in enumerate(rows, 2):
        for c in columns:
            try:
                out[c].append(float(row[c]))
            except (TypeError, ValueError):
                raise RegressionError(f"row {i}: column {c!r} is not numeric ({row.get(c)!r})") from None
    return out
