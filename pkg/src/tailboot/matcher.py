"""Grid search for the power law closest to a GPD tail.

For a cutoff x_min and exponent alpha the objective is the sup over x > x_min
of the gap between the GPD survival conditioned on exceeding x_min and the
power-law survival (x / x_min)**(1 - alpha). The sup is taken over a
log-spaced grid x_min * t with t in (1 + 1e-6, 1e4]; both survivals vanish at
infinity so nothing is lost beyond the grid.

Note that for xi > 0 the conditional GPD tail converges to a power law with
alpha = 1/xi + 1 as x_min grows, so the objective keeps shrinking along the
x_min axis and an unbounded search drifts to the upper edge of the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .distributions import GPD, ConfigurationError, DomainError, PowerLaw

DEFAULT_POINTS = 4000
DEFAULT_SPAN = 1e4


@dataclass(frozen=True)
class GridSpec:
    xmin_lo: float = 1.0
    xmin_hi: float = 50.0
    xmin_step: float = 0.01
    alpha_lo: float = 1.5
    alpha_hi: float = 4.0
    alpha_step: float = 0.005
    points: int = DEFAULT_POINTS
    span: float = DEFAULT_SPAN

    def xmins(self) -> np.ndarray:
        return _axis(self.xmin_lo, self.xmin_hi, self.xmin_step)

    def alphas(self) -> np.ndarray:
        return _axis(self.alpha_lo, self.alpha_hi, self.alpha_step)

    def describe(self) -> str:
        return (f"x_min {self.xmin_lo}:{self.xmin_step}:{self.xmin_hi}, "
                f"alpha {self.alpha_lo}:{self.alpha_step}:{self.alpha_hi}, "
                f"sup over {self.points} log-spaced x in x_min*(1+1e-6, {self.span:g}]")


def _axis(lo, hi, step):
    if step <= 0:
        raise ConfigurationError("grid step must be positive")
    k = int(np.floor((hi - lo) / step + 1e-9))
    # integer multiples keep grid values free of accumulated drift
    return np.round(lo + step * np.arange(k + 1), 12)


@dataclass(frozen=True)
class MatchResult:
    x_min: float
    alpha: float
    distance: float
    grid: str


def relative_grid(points: int = DEFAULT_POINTS, span: float = DEFAULT_SPAN) -> np.ndarray:
    """t = x / x_min at which the sup is evaluated."""
    return np.logspace(np.log10(1 + 1e-6), np.log10(span), points)


def conditional_survival(model, x_min: float, x):
    """P(X > x | X > x_min) for a GPD or a power law."""
    x = np.asarray(x, dtype=float)
    if isinstance(model, GPD):
        if x_min <= model.u:
            raise DomainError(f"x_min must exceed the GPD location {model.u}")
        if model.xi == 0:
            return np.exp(-(x - x_min) / model.sigma)
        base = (model.sigma + model.xi * (x - model.u)) / (model.sigma + model.xi * (x_min - model.u))
        with np.errstate(invalid="ignore"):
            return np.where(base > 0, np.abs(base) ** (-1.0 / model.xi), 0.0)
    if isinstance(model, PowerLaw):
        return (np.maximum(x, x_min) / x_min) ** (1.0 - model.alpha)
    raise TypeError(f"cannot condition {type(model).__name__}")


def tail_distance(g, x_min: float, alpha: float, x=None, points: int = DEFAULT_POINTS,
                  span: float = DEFAULT_SPAN) -> float:
    """max over x of |P(X > x | X > x_min) - (x / x_min)**(1 - alpha)|.

    ``x`` overrides the evaluation points; by default x = x_min * relative_grid().
    """
    if not x_min > 0 or not alpha > 1:
        raise DomainError(f"need x_min > 0 and alpha > 1, got ({x_min}, {alpha})")
    if x is None:
        x = x_min * relative_grid(points, span)
    x = np.asarray(x, dtype=float)
    pl = (x / x_min) ** (1.0 - alpha)
    return float(np.max(np.abs(conditional_survival(g, x_min, x) - pl)))


@njit(cache=True)
def _grid_argmin(xmins, alphas, t, u, sigma, xi):
    log_t = np.log(t)
    best_d = np.inf
    best_i = -1
    best_j = -1
    cond = np.empty(t.size)
    for i in range(xmins.size):
        xm = xmins[i]
        if xm <= u:
            continue
        den = sigma + xi * (xm - u)
        for k in range(t.size):
            if xi == 0.0:
                cond[k] = np.exp(-(xm * t[k] - xm) / sigma)
            else:
                cond[k] = ((sigma + xi * (xm * t[k] - u)) / den) ** (-1.0 / xi)
        for j in range(alphas.size):
            e = 1.0 - alphas[j]
            d = 0.0
            for k in range(t.size):
                v = abs(cond[k] - np.exp(e * log_t[k]))
                if v > d:
                    d = v
                    # grid order already prefers smaller x_min, then alpha
                    if d >= best_d:
                        break
            if d < best_d:
                best_d = d
                best_i = i
                best_j = j
    return best_i, best_j, best_d


def match_gpd(g: GPD, grid: GridSpec | None = None) -> MatchResult:
    """Exhaustive grid search for the (x_min, alpha) minimising tail_distance."""
    grid = grid or GridSpec()
    xmins, alphas = grid.xmins(), grid.alphas()
    xmins = xmins[xmins > g.u]
    alphas = alphas[alphas > 1]
    if xmins.size == 0 or alphas.size == 0:
        raise ConfigurationError(f"empty search grid: {grid.describe()}")
    t = relative_grid(grid.points, grid.span)
    i, j, d = _grid_argmin(xmins, alphas, t, float(g.u), float(g.sigma), float(g.xi))
    return MatchResult(float(xmins[i]), float(alphas[j]), float(d), grid.describe())


def profile_alpha(g: GPD, x_min: float, grid: GridSpec | None = None) -> MatchResult:
    """Best alpha on the grid's alpha axis for a fixed cutoff."""
    grid = grid or GridSpec()
    fixed = GridSpec(x_min, x_min, 1.0, grid.alpha_lo, grid.alpha_hi, grid.alpha_step, grid.points, grid.span)
    return match_gpd(g, fixed)
