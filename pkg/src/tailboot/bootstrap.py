"""Nonparametric bootstrap intervals for the tail exponent and for p."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fitting import (DEFAULT_MIN_DISTINCT, DEFAULT_TAIL_FLOOR, OK, Estimate, FitError, Given, Mode,
                      TailFit, fit, fit_many_estimate, fit_many_given)
from .randomness import SeedSpec, derive_stream
from .tail_risk import CatastropheSpec, plug_in_p, plug_in_p_arrays

CI_METHODS = ("percentile", "basic")


class BootstrapFailure(FitError):
    """No bootstrap replicate could be fitted."""


@dataclass(frozen=True)
class BootstrapResult:
    alpha_reps: np.ndarray
    p_reps: np.ndarray
    xmin_reps: np.ndarray
    ci_alpha: tuple[float, float]
    ci_p: tuple[float, float]
    B: int
    level: float
    failures: int
    base_fit: TailFit
    p_hat: float
    ci_method: str = "percentile"

    @property
    def flagged(self) -> bool:
        """More than 1% of replicates failed to fit."""
        return self.failures > 0.01 * self.B


def order_stat_ranks(B: int, level: float) -> tuple[int, int]:
    """1-based ranks of the interval endpoints among B sorted replicates.

    The lower endpoint is the ceil(a*B)-th order statistic and the upper the
    ceil((1-a)*B)-th, with a = (1 - level)/2. For B=1000, level=0.9 this is
    (50, 950).
    """
    a = (1.0 - level) / 2.0
    # 1e-9 absorbs representation error such as 0.05 * 1000 = 50.000000000000007
    lo = max(1, math.ceil(a * B - 1e-9))
    hi = min(B, math.ceil((1.0 - a) * B - 1e-9))
    return lo, hi


def percentile_interval(reps, level: float) -> tuple[float, float]:
    s = np.sort(np.asarray(reps, dtype=float))
    lo, hi = order_stat_ranks(s.size, level)
    return float(s[lo - 1]), float(s[hi - 1])


def basic_interval(reps, estimate: float, level: float) -> tuple[float, float]:
    lo, hi = percentile_interval(reps, level)
    return 2 * estimate - hi, 2 * estimate - lo


def resample_indices(n: int, B: int, seed: SeedSpec) -> np.ndarray:
    """Row b holds the sorted resample indices drawn from stream seed/[b]."""
    idx = np.empty((B, n), dtype=np.int64)
    for b in range(B):
        u = derive_stream(seed.child(b)).random(n)
        idx[b] = np.minimum((u * n).astype(np.int64), n - 1)
    idx.sort(axis=1)
    return idx


def bootstrap_ci(data, mode: Mode, spec: CatastropheSpec, B: int, seed: SeedSpec | int,
                 tail_floor: int = DEFAULT_TAIL_FLOOR, min_distinct: int = DEFAULT_MIN_DISTINCT,
                 ci_method: str = "percentile", base_fit: TailFit | None = None) -> BootstrapResult:
    """Resample ``data`` B times, refit under ``mode`` and form CIs for alpha and p.

    Replicate b uses the stream ``seed / [b]``; in a coverage study ``seed``
    already carries the run index, giving paths ``[run, b]``. In Estimate mode
    every replicate reruns the full x_min scan.
    """
    if B < 2:
        raise ValueError(f"B must be at least 2, got {B}")
    if ci_method not in CI_METHODS:
        raise ValueError(f"ci_method must be one of {CI_METHODS}, got {ci_method!r}")
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(seed)
    x = np.sort(np.asarray(data, dtype=float).ravel())
    if base_fit is None:
        base_fit = fit(x, mode, tail_floor, min_distinct)
    p_hat = plug_in_p(base_fit, spec)

    idx = resample_indices(x.size, B, seed)
    if isinstance(mode, Given):
        status, xm, alpha, n_tail = fit_many_given(x, idx, float(mode.x_min))
    elif isinstance(mode, Estimate):
        # seeding the scan with the base cutoff only speeds it up
        status, xm, alpha, n_tail = fit_many_estimate(x, idx, int(max(tail_floor, 2)), int(min_distinct),
                                                      float(base_fit.x_min))
    else:
        raise TypeError(f"unknown fit mode {mode!r}")

    ok = status == OK
    failures = int(B - ok.sum())
    if not ok.any():
        raise BootstrapFailure(f"all {B} bootstrap replicates failed to fit")
    alpha, xm = alpha[ok], xm[ok]
    p = plug_in_p_arrays(xm, alpha, n_tail[ok] / x.size, spec)

    if ci_method == "percentile":
        ci_a = percentile_interval(alpha, spec.level)
        ci_p = percentile_interval(p, spec.level)
    else:
        ci_a = basic_interval(alpha, base_fit.alpha, spec.level)
        ci_p = basic_interval(p, p_hat, spec.level)
    return BootstrapResult(alpha, p, xm, ci_a, ci_p, B, spec.level, failures, base_fit, p_hat, ci_method)
