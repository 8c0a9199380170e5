"""Piecewise-linear changepoint trend: design, ridge fit and evaluation.

The trend is

    g(t) = (k + a(t)'delta) * t + (m + a(t)'gamma),    a_j(t) = 1 if t >= s_j

with gamma_j = -s_j * delta_j so that g is continuous. Under that substitution
each changepoint contributes a hinge regressor max(0, t - s_j) and the fit is
an ordinary ridge regression in which only the rate adjustments are penalised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import InsufficientData, SingularSystem
from .ingest import Granularity, UserSeries

MIN_POINTS = 3


@dataclass(frozen=True)
class FitConfig:
    n_changepoints: int = 25
    cp_range: float = 0.8
    lam: float = 0.01

    def __post_init__(self):
        if int(self.n_changepoints) != self.n_changepoints or self.n_changepoints < 0:
            raise ValueError("n_changepoints must be a nonnegative integer")
        if not 0.0 < self.cp_range <= 1.0:
            raise ValueError("cp_range must lie in (0, 1]")
        if not self.lam >= 0.0:
            raise ValueError("lambda must be >= 0")


@dataclass(frozen=True)
class TrendModel:
    user_id: str
    k: float
    m_offset: float
    changepoints: tuple[float, ...] = ()
    delta: tuple[float, ...] = ()
    gamma: tuple[float, ...] = field(default=None)
    lam: float = 0.0
    n_train: int = 0
    granularity: Granularity = Granularity.ANNUAL
    origin: date = date(2014, 1, 1)

    def __post_init__(self):
        cps = tuple(float(s) for s in self.changepoints)
        delta = tuple(float(d) for d in self.delta)
        object.__setattr__(self, "changepoints", cps)
        object.__setattr__(self, "delta", delta)
        if self.gamma is None:
            object.__setattr__(self, "gamma", tuple(-s * d for s, d in zip(cps, delta)))
        else:
            object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        if not len(cps) == len(delta) == len(self.gamma):
            raise ValueError("changepoints, delta and gamma must have equal length")
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("changepoints must be strictly increasing")
        object.__setattr__(self, "granularity", Granularity.parse(self.granularity))

    @property
    def final_rate(self) -> float:
        return self.k + sum(self.delta)

    def __call__(self, t):
        if np.ndim(t) == 0:
            return eval_trend(self, float(t))
        return np.array([eval_trend(self, float(x)) for x in np.asarray(t, dtype=float)])


def place_changepoints(n_train: int, cfg: FitConfig) -> list[float]:
    """Uniform candidate changepoints over (0, cp_range * (n_train - 1)]."""
    if n_train < 1:
        raise ValueError("n_train must be >= 1")
    count = min(cfg.n_changepoints, max(0, n_train - 2))
    span = cfg.cp_range * (n_train - 1)
    return [span * j / count for j in range(1, count + 1)]


def design_row(t: float, changepoints) -> np.ndarray:
    """Regressor row ``[t, 1, max(0, t - s_1), ..., max(0, t - s_J)]``."""
    return np.array([t, 1.0] + [max(0.0, t - s) for s in changepoints], dtype=float)


def design_matrix(times, changepoints) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    cols = [t, np.ones_like(t)] + [np.maximum(0.0, t - s) for s in changepoints]
    return np.column_stack(cols)


def penalty_diagonal(n_changepoints: int, lam: float) -> np.ndarray:
    # k and m_offset are unpenalised
    return np.array([0.0, 0.0] + [lam] * n_changepoints)


def fit_trend(series: UserSeries, cfg: FitConfig | None = None) -> TrendModel:
    """Minimise sum (y - g(t))^2 + lam * sum delta^2 over (k, m_offset, delta).

    Solved as an augmented least-squares problem with an SVD-based solver.
    The response is centred on its median first; the intercept is unpenalised
    so the minimiser is unchanged, and a constant series is recovered exactly.
    """
    cfg = cfg or FitConfig()
    n = len(series)
    if n < MIN_POINTS:
        raise InsufficientData(f"{series.user_id}: need at least {MIN_POINTS} periods, got {n}")
    cps = place_changepoints(n, cfg)
    X = design_matrix(series.times, cps)
    y = np.asarray(series.values, dtype=float)
    centre = float(np.median(y))
    rhs = y - centre
    if cfg.lam > 0 and cps:
        ridge = np.sqrt(cfg.lam) * np.eye(len(cps))
        A = np.vstack([X, np.hstack([np.zeros((len(cps), 2)), ridge])])
        rhs = np.concatenate([rhs, np.zeros(len(cps))])
    else:
        A = X
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise SingularSystem(f"{series.user_id}: design matrix is rank deficient and lambda = 0")
    coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return TrendModel(
        user_id=series.user_id,
        k=float(coef[0]),
        m_offset=float(coef[1]) + centre,
        changepoints=tuple(cps),
        delta=tuple(float(d) for d in coef[2:]),
        lam=float(cfg.lam),
        n_train=n,
        granularity=series.granularity,
        origin=series.origin,
    )


def eval_trend(model: TrendModel, t: float) -> float:
    """g(t) in rate/offset form; a changepoint is active once t >= s_j."""
    rate = model.k
    offset = model.m_offset
    for s, d, g in zip(model.changepoints, model.delta, model.gamma):
        if t >= s:
            rate += d
            offset += g
    return rate * t + offset


def eval_trend_hinge(model: TrendModel, t: float) -> float:
    """g(t) in hinge form, k*t + m + sum delta_j * max(0, t - s_j)."""
    return model.k * t + model.m_offset + sum(
        d * (t - s) for s, d in zip(model.changepoints, model.delta) if t >= s
    )


def penalized_objective(model: TrendModel, series: UserSeries) -> float:
    resid = np.asarray(series.values) - design_matrix(series.times, model.changepoints) @ coefficients(model)
    return float(resid @ resid + model.lam * sum(d * d for d in model.delta))


def coefficients(model: TrendModel) -> np.ndarray:
    """Coefficient vector aligned with :func:`design_row`."""
    return np.array([model.k, model.m_offset, *model.delta], dtype=float)
