"""Continuous power-law tail fitting.

``fit_alpha`` is the maximum-likelihood exponent for a known lower cutoff;
``estimate_xmin`` scans candidate cutoffs and keeps the one whose fitted tail
is closest to the data in Kolmogorov-Smirnov distance. The scan is compiled
with numba because the coverage study runs it about a million times per
estimated-cutoff setup.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Union

import numpy as np
from numba import njit

DEFAULT_TAIL_FLOOR = 10
DEFAULT_MIN_DISTINCT = 10

# status codes shared by the batch kernels
OK, INSUFFICIENT, DEGENERATE = 0, 1, 2


class FitError(ValueError):
    """The tail model cannot be fitted to the data."""


class InsufficientDataError(FitError):
    pass


class DegenerateSampleError(FitError):
    """Every tail observation equals x_min, so the MLE diverges."""


@dataclass(frozen=True)
class Given:
    x_min: float

    def __str__(self):
        return "given"


@dataclass(frozen=True)
class Estimate:
    def __str__(self):
        return "est"


Mode = Union[Given, Estimate]


def parse_mode(text: str | float | None) -> Mode:
    """``"est"``/``"estimate"``/None -> Estimate(), anything numeric -> Given."""
    if text is None:
        return Estimate()
    if isinstance(text, (int, float)):
        return Given(float(text))
    t = str(text).strip().lower()
    if t in ("est", "estimate", "estimated", "auto"):
        return Estimate()
    return Given(float(t))


@dataclass(frozen=True)
class TailFit:
    x_min: float
    alpha: float
    n_tail: int
    n: int
    ks: float
    xmin_mode: Literal["given", "estimated"]

    @property
    def p_tail(self) -> float:
        return self.n_tail / self.n


@njit(cache=True)
def _candidate_ks(logs, i, m, e, best_d, best_i, stride):
    """KS distance of logs[i:] against a power law with exponent e + 1.

    Gives up as soon as the running sup shows candidate ``i`` cannot beat
    (best_d, best_i); returns (distance so far, still_competitive). With
    stride > 1 only every stride-th point is visited, which bounds the
    distance from below.
    """
    n = logs.size
    l0 = logs[i]
    d = 0.0
    for j in range(i, n, stride):
        f = 1.0 - np.exp(-e * (logs[j] - l0))
        k = j - i
        lo = f - k / m
        hi = (k + 1) / m - f
        if lo > d:
            d = lo
        if hi > d:
            d = hi
        if d > best_d or (d == best_d and i > best_i):
            return d, False
    return d, True


@njit(cache=True)
def _fit_given(x, x_min):
    # x sorted ascending; returns (status, alpha, n_tail, ks)
    n = x.size
    start = np.searchsorted(x, x_min)
    m = n - start
    if m < 2:
        return INSUFFICIENT, np.nan, m, np.nan
    s = 0.0
    for j in range(start, n):
        s += np.log(x[j] / x_min)
    if s <= 0.0:
        return DEGENERATE, np.nan, m, np.nan
    alpha = 1.0 + m / s
    # KS of the tail against PL(x_min, alpha); the first tail point may sit
    # above x_min, so evaluate F relative to x_min rather than x[start]
    e = alpha - 1.0
    d = 0.0
    for j in range(start, n):
        f = 1.0 - np.exp(-e * np.log(x[j] / x_min))
        k = j - start
        lo = f - k / m
        hi = (k + 1) / m - f
        if lo > d:
            d = lo
        if hi > d:
            d = hi
    return OK, alpha, m, d


@njit(cache=True)
def _scan(x, tail_floor, min_distinct, guess):
    """Return (status, best_start, alpha, n_tail, ks) for sorted positive x.

    ``guess`` is a cutoff whose distance is computed first to seed the
    pruning bound (pass a non-positive value for none). It changes the
    running time only, never the result.
    """
    n = x.size
    logs = np.log(x)
    # suffix sums of logs, so each candidate's MLE costs O(1)
    suffix = np.empty(n + 1)
    suffix[n] = 0.0
    for j in range(n - 1, -1, -1):
        suffix[j] = suffix[j + 1] + logs[j]
    n_distinct = 1
    for j in range(1, n):
        if x[j] != x[j - 1]:
            n_distinct += 1
    if n_distinct < min_distinct:
        return INSUFFICIENT, -1, np.nan, 0, np.nan

    top = x[n - 1]
    best_d = np.inf
    best_i = -1
    best_a = np.nan
    if guess > 0:
        gi = np.searchsorted(x, guess)
        if gi < n and n - gi >= tail_floor and x[gi] < top:
            m = n - gi
            best_a = 1.0 + m / (suffix[gi] - m * logs[gi])
            best_d, _ = _candidate_ks(logs, gi, m, best_a - 1.0, np.inf, -1, 1)
            best_i = gi

    i = 0
    while i < n:
        m = n - i
        if m < tail_floor or x[i] >= top:
            break
        if i != best_i:
            alpha = 1.0 + m / (suffix[i] - m * logs[i])
            d, ok = _candidate_ks(logs, i, m, alpha - 1.0, best_d, best_i, 7)
            if ok:
                d, ok = _candidate_ks(logs, i, m, alpha - 1.0, best_d, best_i, 1)
                if ok:
                    best_d = d
                    best_i = i
                    best_a = alpha
        v = x[i]
        while i < n and x[i] == v:
            i += 1
    if best_i < 0:
        return INSUFFICIENT, -1, np.nan, 0, np.nan
    return OK, best_i, best_a, n - best_i, best_d


def _prepare(data) -> np.ndarray:
    x = np.sort(np.asarray(data, dtype=float).ravel())
    if x.size and (not np.all(np.isfinite(x)) or x[0] <= 0):
        raise FitError("data must be finite and positive")
    return x


def fit_alpha(data, x_min: float) -> TailFit:
    """MLE alpha = 1 + n_tail / sum(log(x_i / x_min)) over x_i >= x_min."""
    if not x_min > 0:
        raise FitError(f"x_min must be positive, got {x_min}")
    x = _prepare(data)
    status, alpha, m, ks = _fit_given(x, float(x_min))
    if status == INSUFFICIENT:
        raise InsufficientDataError(f"need at least 2 observations >= x_min={x_min}, found {m}")
    if status == DEGENERATE:
        raise DegenerateSampleError(f"all {m} tail observations equal x_min={x_min}")
    return TailFit(float(x_min), float(alpha), int(m), x.size, float(ks), "given")


def estimate_xmin(data, tail_floor: int = DEFAULT_TAIL_FLOOR,
                  min_distinct: int = DEFAULT_MIN_DISTINCT) -> TailFit:
    """Choose x_min among the distinct data values by minimal KS distance.

    Candidates must leave at least ``tail_floor`` observations in the tail
    and at least one observation strictly above the cutoff. Ties go to the
    smallest cutoff. ``tail_floor=2`` scans every distinct value but the
    largest.
    """
    x = _prepare(data)
    if x.size == 0:
        raise InsufficientDataError("no data")
    status, i, alpha, m, ks = _scan(x, int(max(tail_floor, 2)), int(min_distinct), -1.0)
    if status != OK:
        raise InsufficientDataError(
            f"need at least {min_distinct} distinct values and a tail of {tail_floor}")
    return TailFit(float(x[i]), float(alpha), int(m), x.size, float(ks), "estimated")


def fit(data, mode: Mode, tail_floor: int = DEFAULT_TAIL_FLOOR,
        min_distinct: int = DEFAULT_MIN_DISTINCT) -> TailFit:
    if isinstance(mode, Given):
        return fit_alpha(data, mode.x_min)
    if isinstance(mode, Estimate):
        return estimate_xmin(data, tail_floor, min_distinct)
    raise TypeError(f"unknown fit mode {mode!r}")


@njit(cache=True)
def fit_many_given(x, idx, x_min):
    """Fit every resample ``x[idx[b]]``; rows of idx must be sorted."""
    B = idx.shape[0]
    status = np.empty(B, np.int64)
    alpha = np.empty(B)
    n_tail = np.empty(B, np.int64)
    xm = np.full(B, x_min)
    for b in range(B):
        st, a, m, _ = _fit_given(x[idx[b]], x_min)
        status[b] = st
        alpha[b] = a
        n_tail[b] = m
    return status, xm, alpha, n_tail


@njit(cache=True)
def fit_many_estimate(x, idx, tail_floor, min_distinct, guess):
    B = idx.shape[0]
    status = np.empty(B, np.int64)
    alpha = np.empty(B)
    n_tail = np.empty(B, np.int64)
    xm = np.empty(B)
    for b in range(B):
        row = x[idx[b]]
        st, i, a, m, _ = _scan(row, tail_floor, min_distinct, guess)
        status[b] = st
        alpha[b] = a
        n_tail[b] = m
        xm[b] = row[i] if st == OK else np.nan
    return status, xm, alpha, n_tail
