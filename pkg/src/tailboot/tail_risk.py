"""Probability of at least one catastrophic event in a history of n events.

With ``N ~ Binomial(n, p_tail)`` tail events and ``q = P(X < cat | X >= x_min)``,

    p = 1 - E[q**N] = 1 - (1 - p_tail * (1 - q))**n

by the binomial probability generating function.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .distributions import GPD, MixedPowerLaw, PowerLaw, TailModel, gpd_cdf, p_tail, sample
from .fitting import TailFit
from .randomness import SeedSpec, derive_stream

# cutoff the GPD(0, 1, 1/1.4) model is matched to a power law at
GPD_MATCHED_XMIN = 13.44
GPD_MATCHED_ALPHA = 2.31


class CatastropheWarning(UserWarning):
    """cat <= x_min: every tail event counts as catastrophic."""


@dataclass(frozen=True)
class CatastropheSpec:
    cat: float = 2749.0
    n: int = 1000
    level: float = 0.90

    def __post_init__(self):
        if not self.cat > 0:
            raise ValueError(f"cat must be positive, got {self.cat}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not 0 < self.level < 1:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")


def pgf_p(p_tail: float, tail_survival: float, n: int) -> float:
    """1 - (1 - p_tail * tail_survival)**n, accurate for tiny products."""
    r = p_tail * tail_survival
    if r >= 1.0:
        return 1.0
    return -math.expm1(n * math.log1p(-r))


def _pl_survival(x_min: float, alpha: float, cat: float) -> float:
    if cat <= x_min:
        warnings.warn(f"cat={cat} <= x_min={x_min}; q = 0", CatastropheWarning, stacklevel=3)
        return 1.0
    if math.isinf(cat):
        return 0.0
    return math.exp((1.0 - alpha) * math.log(cat / x_min))


def _gpd_survival(g: GPD, x: float) -> float:
    if x >= g.upper or math.isinf(x):
        return 0.0
    if x <= g.u:
        return 1.0
    return 1.0 - float(gpd_cdf(g, x))


def tail_parameters(model: TailModel, spec: CatastropheSpec, x_min: float | None = None):
    """(p_tail, P(X >= cat | X >= x_min)) for a known generating model.

    For the GPD the cutoff defaults to the matched value 13.44 and both
    factors come from the GPD itself; their product is then the exact
    unconditional survival at cat whatever the cutoff.
    """
    cat = spec.cat
    if isinstance(model, PowerLaw):
        return 1.0, _pl_survival(model.x_min, model.alpha, cat)
    if isinstance(model, MixedPowerLaw):
        return p_tail(model.body, model.threshold), _pl_survival(model.threshold, model.tail.alpha, cat)
    if isinstance(model, GPD):
        xm = GPD_MATCHED_XMIN if x_min is None else x_min
        pt = _gpd_survival(model, xm)
        if cat <= xm:
            warnings.warn(f"cat={cat} <= x_min={xm}; q = 0", CatastropheWarning, stacklevel=2)
            return pt, 1.0
        return pt, _gpd_survival(model, cat) / pt if pt > 0 else 0.0
    raise TypeError(f"unknown tail model {type(model).__name__}")


def true_p(model: TailModel, spec: CatastropheSpec, x_min: float | None = None) -> float:
    pt, s = tail_parameters(model, spec, x_min)
    return pgf_p(pt, s, spec.n)


def plug_in_p(fit: TailFit, spec: CatastropheSpec) -> float:
    """p-hat for one dataset: the same formula with the fitted tail."""
    return pgf_p(fit.p_tail, _pl_survival(fit.x_min, fit.alpha, spec.cat), spec.n)


def plug_in_p_arrays(x_min, alpha, p_tail, spec: CatastropheSpec) -> np.ndarray:
    """Vectorised plug_in_p over bootstrap replicates."""
    x_min, alpha, p_tail = (np.asarray(a, dtype=float) for a in (x_min, alpha, p_tail))
    with np.errstate(divide="ignore", invalid="ignore"):
        surv = np.where(spec.cat <= x_min, 1.0, np.exp((1.0 - alpha) * np.log(spec.cat / x_min)))
        r = np.clip(p_tail * surv, 0.0, 1.0)
        return -np.expm1(spec.n * np.log1p(-r))


def model_survival(model: TailModel, x: float) -> float:
    """Unconditional P(X >= x)."""
    if isinstance(model, PowerLaw):
        return 1.0 if x <= model.x_min else _pl_survival(model.x_min, model.alpha, x)
    if isinstance(model, MixedPowerLaw):
        if x <= model.threshold:
            s = model.body.severities
            below = np.count_nonzero((s >= x) & (s < model.threshold)) / s.size
            return below + p_tail(model.body, model.threshold)
        return p_tail(model.body, model.threshold) * _pl_survival(model.threshold, model.tail.alpha, x)
    if isinstance(model, GPD):
        return _gpd_survival(model, x)
    raise TypeError(f"unknown tail model {type(model).__name__}")


def max_equivalence_gap(model: TailModel, spec: CatastropheSpec, x_min: float | None = None) -> float:
    """|true_p - P(max of n draws >= cat)|."""
    p_max = -math.expm1(spec.n * math.log1p(-model_survival(model, spec.cat)))
    return abs(true_p(model, spec, x_min) - p_max)


def true_p_mc(model: TailModel, spec: CatastropheSpec, histories: int, seed: SeedSpec | int,
              chunk: int = 1000) -> float:
    """Fraction of simulated n-event histories with an event >= cat.

    Histories are simulated in blocks of ``chunk``; block k draws from the
    stream ``seed / [k]`` so the result does not depend on how blocks are
    scheduled.
    """
    if histories < 1:
        raise ValueError("histories must be at least 1")
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(seed)
    hits = 0
    for k, start in enumerate(range(0, histories, chunk)):
        h = min(chunk, histories - start)
        src = derive_stream(seed.child(k))
        draws = sample(model, h * spec.n, src).reshape(h, spec.n)
        hits += int(np.count_nonzero(draws.max(axis=1) >= spec.cat))
    return hits / histories
