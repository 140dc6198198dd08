"""Repeated-sampling coverage of bootstrap intervals.

One experiment draws n observations from the generating model using stream
``[run_index]``, fits the tail, bootstraps with streams ``[run_index, b]`` and
checks whether the intervals contain the true alpha and p. A study repeats
this R times and aggregates coverage bias and median interval width.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bootstrap import bootstrap_ci
from .distributions import GPD, MixedPowerLaw, PowerLaw, TailModel, sample
from .fitting import DEFAULT_MIN_DISTINCT, DEFAULT_TAIL_FLOOR, Estimate, FitError, Given, Mode, TailFit, fit
from .randomness import SeedSpec, derive_stream
from .tail_risk import GPD_MATCHED_ALPHA, GPD_MATCHED_XMIN, CatastropheSpec, true_p

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StudySetup:
    label: str
    model_name: str
    model: TailModel
    mode: Mode
    alpha_true: float
    p_true: float

    @property
    def xmin_label(self) -> str:
        return f"{self.mode.x_min:g}" if isinstance(self.mode, Given) else "est"


@dataclass(frozen=True)
class ExperimentRecord:
    run_index: int
    fit: TailFit | None
    p_hat: float
    ci_alpha: tuple[float, float]
    ci_p: tuple[float, float]
    covered_alpha: bool
    covered_p: bool
    boot_failures: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def widths(self) -> tuple[float, float]:
        return self.ci_alpha[1] - self.ci_alpha[0], self.ci_p[1] - self.ci_p[0]


@dataclass
class CoverageReport:
    setup: StudySetup
    R: int
    B: int
    records: list[ExperimentRecord] = field(default_factory=list)
    level: float = 0.90

    @property
    def label(self) -> str:
        return self.setup.label

    @property
    def successful(self) -> list[ExperimentRecord]:
        return [r for r in self.records if r.ok]

    @property
    def n_ok(self) -> int:
        return len(self.successful)

    @property
    def failed_runs(self) -> int:
        return len(self.records) - self.n_ok

    @property
    def boot_failures(self) -> int:
        return sum(r.boot_failures for r in self.records)

    def _mean(self, attr):
        ok = self.successful
        return float(np.mean([getattr(r, attr) for r in ok])) if ok else math.nan

    @property
    def coverage_alpha(self) -> float:
        return self._mean("covered_alpha")

    @property
    def coverage_p(self) -> float:
        return self._mean("covered_p")

    def bias(self, coverage: float) -> float:
        """Coverage minus the nominal level, in percentage points."""
        return 100.0 * coverage - 100.0 * self.level

    @property
    def bias_alpha(self) -> float:
        return self.bias(self.coverage_alpha)

    @property
    def bias_p(self) -> float:
        return self.bias(self.coverage_p)

    @property
    def median_width_alpha(self) -> float:
        ok = self.successful
        return float(np.median([r.widths[0] for r in ok])) if ok else math.nan

    @property
    def median_width_p(self) -> float:
        ok = self.successful
        return float(np.median([r.widths[1] for r in ok])) if ok else math.nan


def paper_setups(spec: CatastropheSpec, body=None, x_min: float = 10.0, alpha: float = 2.4,
                 gpd_truth: tuple[float, float] | None = None) -> list[StudySetup]:
    """The six setups in table order: PL, PL-Mix, GPD with x_min given, then estimated.

    PL-Mix rows are skipped when ``body`` is None. ``gpd_truth`` overrides the
    (x_min, alpha) the GPD is matched to; default (13.44, 2.31).
    """
    models: list[tuple[str, TailModel, float, float]] = []
    pl = PowerLaw(x_min, alpha)
    models.append(("PL", pl, alpha, true_p(pl, spec)))
    if body is not None:
        mix = MixedPowerLaw(body, pl)
        models.append(("PL-Mix", mix, alpha, true_p(mix, spec)))
    gpd = GPD(0.0, 1.0, 1.0 / (alpha - 1.0))
    gx, ga = gpd_truth or (GPD_MATCHED_XMIN, GPD_MATCHED_ALPHA)
    models.append(("GPD", gpd, ga, true_p(gpd, spec, x_min=gx)))

    setups = []
    for mode in (Given(x_min), Estimate()):
        for name, model, a_true, p_true in models:
            setups.append(StudySetup(f"{name}-{mode}", name, model, mode, a_true, p_true))
    return setups


def run_experiment(setup: StudySetup, spec: CatastropheSpec, B: int, seed: SeedSpec, run_index: int,
                   tail_floor: int = DEFAULT_TAIL_FLOOR, min_distinct: int = DEFAULT_MIN_DISTINCT,
                   ci_method: str = "percentile") -> ExperimentRecord:
    run_seed = seed.child(run_index)
    data = sample(setup.model, spec.n, derive_stream(run_seed))
    nan2 = (math.nan, math.nan)
    try:
        base = fit(data, setup.mode, tail_floor, min_distinct)
        res = bootstrap_ci(data, setup.mode, spec, B, run_seed, tail_floor, min_distinct, ci_method, base_fit=base)
    except FitError as exc:
        return ExperimentRecord(run_index, None, math.nan, nan2, nan2, False, False, error=str(exc))
    ca, cp = res.ci_alpha, res.ci_p
    return ExperimentRecord(
        run_index, base, res.p_hat, ca, cp,
        covered_alpha=bool(ca[0] <= setup.alpha_true <= ca[1]),
        covered_p=bool(cp[0] <= setup.p_true <= cp[1]),
        boot_failures=res.failures,
    )


def _run_block(args):
    setup, spec, B, seed, runs, kw = args
    return [run_experiment(setup, spec, B, seed, r, **kw) for r in runs]


def run_study(setup: StudySetup, spec: CatastropheSpec, R: int, B: int, seed: SeedSpec | int,
              workers: int = 1, tail_floor: int = DEFAULT_TAIL_FLOOR,
              min_distinct: int = DEFAULT_MIN_DISTINCT, ci_method: str = "percentile",
              block: int = 10) -> CoverageReport:
    """R independent experiments; the result does not depend on ``workers``."""
    if R < 1:
        raise ValueError(f"R must be at least 1, got {R}")
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(seed)
    kw = dict(tail_floor=tail_floor, min_distinct=min_distinct, ci_method=ci_method)
    blocks = [range(s, min(R, s + block)) for s in range(0, R, block)]
    jobs = [(setup, spec, B, seed, b, kw) for b in blocks]
    records: list[ExperimentRecord] = []
    if workers <= 1:
        for job in jobs:
            records.extend(_run_block(job))
            log.info("%s: %d/%d runs", setup.label, len(records), R)
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for recs in ex.map(_run_block, jobs):
                records.extend(recs)
                log.info("%s: %d/%d runs", setup.label, len(records), R)
    records.sort(key=lambda r: r.run_index)
    return CoverageReport(setup, R, B, records, spec.level)


def figure_data(report: CoverageReport) -> list[dict]:
    """Successful runs ordered by p-hat: one row per interval."""
    ok = sorted(report.successful, key=lambda r: (r.p_hat, r.run_index))
    return [
        dict(rank=k + 1, p_hat=r.p_hat, ci_lo=r.ci_p[0], ci_hi=r.ci_p[1], covered=int(r.covered_p),
             p_true=report.setup.p_true)
        for k, r in enumerate(ok)
    ]


def table_one(reports: Sequence[CoverageReport]) -> list[dict]:
    return [
        dict(model=r.setup.model_name, xmin_mode=r.setup.xmin_label, bias_alpha_pct=r.bias_alpha,
             bias_p_pct=r.bias_p, width_alpha=r.median_width_alpha, width_p=r.median_width_p)
        for r in reports
    ]
