"""Generating models: continuous power law, generalized Pareto, and the
empirical-body / power-law-tail mixture.

All samplers use inverse-transform sampling, so ``n`` draws consume exactly
``n`` uniforms (the mixture consumes two per draw: one picks the body
observation, one feeds the tail quantile).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .randomness import UniformSource


class DomainError(ValueError):
    """Argument outside the support of a distribution."""


class ConfigurationError(ValueError):
    """A model was constructed or used with invalid settings."""


@dataclass(frozen=True)
class PowerLaw:
    x_min: float
    alpha: float

    def __post_init__(self):
        if not self.x_min > 0:
            raise ConfigurationError(f"x_min must be positive, got {self.x_min}")
        if not self.alpha > 1:
            raise ConfigurationError(f"alpha must exceed 1, got {self.alpha}")

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < self.x_min, 1.0, (np.maximum(x, self.x_min) / self.x_min) ** (1.0 - self.alpha))

    def cdf(self, x):
        return pl_cdf(self, x)

    def quantile(self, q):
        return pl_quantile(self, q)


@dataclass(frozen=True)
class GPD:
    u: float = 0.0
    sigma: float = 1.0
    xi: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")

    @property
    def upper(self) -> float:
        return self.u - self.sigma / self.xi if self.xi < 0 else math.inf

    def survival(self, x):
        return 1.0 - gpd_cdf(self, x)

    def cdf(self, x):
        return gpd_cdf(self, x)

    def quantile(self, q):
        return gpd_quantile(self, q)


@dataclass(frozen=True, eq=False)
class EmpiricalBody:
    """Observed event severities, sampled uniformly with replacement."""

    severities: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.severities, dtype=float).ravel())
        if s.size == 0:
            raise ConfigurationError("empirical body is empty")
        if not np.all(np.isfinite(s)) or s[0] <= 0:
            raise ConfigurationError("empirical body must contain finite positive values only")
        s.setflags(write=False)
        object.__setattr__(self, "severities", s)

    def __len__(self):
        return self.severities.size

    def p_tail(self, threshold: float) -> float:
        return p_tail(self, threshold)

    @classmethod
    def from_file(cls, path: str | Path) -> "EmpiricalBody":
        return cls(read_severities(path))


@dataclass(frozen=True)
class MixedPowerLaw:
    body: EmpiricalBody
    tail: PowerLaw

    @property
    def threshold(self) -> float:
        return self.tail.x_min

    def cdf(self, x):
        # below the threshold the mixture is the body's ECDF; above it the
        # remaining mass p_tail follows the power law
        x = np.asarray(x, dtype=float)
        s = self.body.severities
        below = np.searchsorted(s[s < self.threshold], x, side="right") / s.size
        pt = p_tail(self.body, self.threshold)
        above = 1.0 - pt * self.tail.survival(x)
        return np.where(x < self.threshold, below, above)


TailModel = Union[PowerLaw, GPD, MixedPowerLaw]


class SeverityParseError(ValueError):
    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


def read_severities(path: str | Path) -> np.ndarray:
    """Parse a newline-delimited file of positive numbers.

    Blank lines and text after ``#`` are ignored. Raises
    :class:`SeverityParseError` naming the first offending line.
    """
    values = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                v = float(line)
            except ValueError:
                raise SeverityParseError(path, lineno, f"not a number: {line!r}") from None
            if not math.isfinite(v) or v <= 0:
                raise SeverityParseError(path, lineno, f"severity must be positive and finite, got {line}")
            values.append(v)
    if not values:
        raise SeverityParseError(path, 0, "no severities found")
    return np.array(values)


def _check_q(q):
    q = np.asarray(q, dtype=float)
    if np.any(~((q >= 0) & (q < 1))):
        raise DomainError("quantile level must lie in [0, 1)")
    return q


def _ratio1p(f, w):
    """f(w) / w with the w -> 0 limit 1; keeps tiny shape parameters stable."""
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(w == 0, 1.0, f(w) / np.where(w == 0, 1.0, w))


def _scalar(x, out):
    return float(out) if np.ndim(x) == 0 else out


def pl_cdf(m: PowerLaw, x):
    """1 - (x / x_min)^(1 - alpha) for x >= x_min."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < m.x_min) or np.any(np.isnan(xa)):
        raise DomainError(f"power-law CDF defined for x >= {m.x_min}")
    out = -np.expm1((1.0 - m.alpha) * np.log(xa / m.x_min))
    return _scalar(x, out)


def pl_quantile(m: PowerLaw, q):
    qa = _check_q(q)
    out = m.x_min * np.exp(-np.log1p(-qa) / (m.alpha - 1.0))
    return _scalar(q, out)


def gpd_cdf(m: GPD, x):
    xa = np.asarray(x, dtype=float)
    if np.any(xa < m.u) or np.any(xa > m.upper) or np.any(np.isnan(xa)):
        raise DomainError(f"x outside GPD support [{m.u}, {m.upper}]")
    z = (xa - m.u) / m.sigma
    if m.xi == 0:
        out = -np.expm1(-z)
    else:
        # log1p(xi z) / xi written as z * log1p(w) / w, w = xi z
        out = -np.expm1(-z * _ratio1p(np.log1p, m.xi * z))
    return _scalar(x, out)


def gpd_quantile(m: GPD, q):
    qa = _check_q(q)
    if m.xi == 0:
        out = m.u - m.sigma * np.log1p(-qa)
    else:
        t = -np.log1p(-qa)
        out = m.u + m.sigma * t * _ratio1p(np.expm1, m.xi * t)
    return _scalar(q, out)


def p_tail(b: EmpiricalBody, threshold: float) -> float:
    """Fraction of body severities at or above ``threshold``."""
    s = b.severities
    return float(s.size - np.searchsorted(s, threshold, side="left")) / s.size


def sample(m: TailModel, n: int, src: UniformSource) -> np.ndarray:
    """Draw ``n`` i.i.d. observations from ``m``."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if isinstance(m, PowerLaw):
        return pl_quantile(m, src.random(n))
    if isinstance(m, GPD):
        return gpd_quantile(m, src.random(n))
    if isinstance(m, MixedPowerLaw):
        s = m.body.severities
        # uniform over the multiset; min() guards the u*len == len edge
        idx = np.minimum((src.random(n) * s.size).astype(np.int64), s.size - 1)
        y = s[idx]
        z = pl_quantile(m.tail, src.random(n))
        return np.where(y < m.threshold, y, z)
    raise TypeError(f"unknown tail model {type(m).__name__}")
