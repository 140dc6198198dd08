"""Run a configured study and write table1.csv, figure CSVs and a manifest."""

from __future__ import annotations

import csv
import io
import json
import logging
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from . import __version__
from .config import StudyConfig, dump_config
from .coverage import CoverageReport, StudySetup, figure_data, paper_setups, run_study, table_one
from .distributions import GPD, EmpiricalBody
from .matcher import match_gpd
from .tail_risk import CatastropheSpec

log = logging.getLogger(__name__)

TABLE_COLUMNS = ("model", "xmin_mode", "bias_alpha_pct", "bias_p_pct", "width_alpha", "width_p")
FIGURE_COLUMNS = ("rank", "p_hat", "ci_lo", "ci_hi", "covered", "p_true")


@dataclass
class StudyOutcome:
    reports: list[CoverageReport]
    timings: dict[str, float] = field(default_factory=dict)
    written: list[Path] = field(default_factory=list)

    @property
    def aborted(self) -> list[str]:
        """Setups in which no experiment produced an interval."""
        return [r.label for r in self.reports if r.n_ok == 0]


def build_setups(cfg: StudyConfig) -> list[StudySetup]:
    spec = CatastropheSpec(cfg.cat, cfg.n, cfg.level)
    body = EmpiricalBody.from_file(cfg.body_file) if "PL-Mix" in cfg.models else None
    gpd_truth = None
    if cfg.gpd_truth == "matcher" and "GPD" in cfg.models:
        m = match_gpd(GPD(0.0, 1.0, 1.0 / (cfg.alpha - 1.0)))
        gpd_truth = (m.x_min, m.alpha)
    setups = paper_setups(spec, body, cfg.x_min, cfg.alpha, gpd_truth)
    return [s for s in setups if s.model_name in cfg.models and str(s.mode) in cfg.modes]


def run_configured(cfg: StudyConfig) -> StudyOutcome:
    spec = CatastropheSpec(cfg.cat, cfg.n, cfg.level)
    outcome = StudyOutcome([])
    for setup in build_setups(cfg):
        t0 = time.perf_counter()
        rep = run_study(setup, spec, cfg.R, cfg.B, cfg.master_seed, workers=cfg.workers,
                        tail_floor=cfg.tail_floor, min_distinct=cfg.min_distinct, ci_method=cfg.ci_method)
        outcome.timings[setup.label] = time.perf_counter() - t0
        outcome.reports.append(rep)
        log.info("%s done in %.1fs: coverage alpha %.3f, p %.3f", setup.label,
                 outcome.timings[setup.label], rep.coverage_alpha, rep.coverage_p)
    return outcome


def _header(cfg: StudyConfig) -> str:
    return f"# master_seed={cfg.master_seed} config_hash={cfg.config_hash()}\n"


def _csv_text(cfg: StudyConfig, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})
    return buf.getvalue()


def read_csv(path: str | Path) -> list[dict[str, str]]:
    """Read a report CSV, skipping the '#' provenance line."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def figure_filename(label: str) -> str:
    return f"figure1_{label}.csv"


def write_outputs(cfg: StudyConfig, outcome: StudyOutcome, out_dir: str | Path | None = None) -> list[Path]:
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    suffix = ".partial" if outcome.aborted else ""
    files = {
        "table1.csv": _csv_text(cfg, TABLE_COLUMNS, table_one(outcome.reports)),
    }
    for rep in outcome.reports:
        files[figure_filename(rep.label)] = _csv_text(cfg, FIGURE_COLUMNS, figure_data(rep))
    written = []
    for name, text in files.items():
        p = out / (name + suffix)
        p.write_text(text)
        written.append(p)
    manifest = {
        "master_seed": cfg.master_seed,
        "config_hash": cfg.config_hash(),
        "profile": cfg.profile,
        "config": dump_config(cfg),
        "versions": {"tailboot": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "numba": numba.__version__},
        "setups": [
            {
                "label": r.label, "alpha_true": r.setup.alpha_true, "p_true": r.setup.p_true,
                "R": r.R, "B": r.B, "runs_ok": r.n_ok, "failed_runs": r.failed_runs,
                "bootstrap_failures": r.boot_failures,
                "coverage_alpha": r.coverage_alpha, "coverage_p": r.coverage_p,
                "bias_alpha_pct": r.bias_alpha, "bias_p_pct": r.bias_p,
                "median_width_alpha": r.median_width_alpha, "median_width_p": r.median_width_p,
                "seconds": outcome.timings.get(r.label),
            }
            for r in outcome.reports
        ],
        "aborted_setups": outcome.aborted,
    }
    p = out / ("manifest.json" + suffix)
    p.write_text(json.dumps(manifest, indent=2) + "\n")
    written.append(p)
    outcome.written = written
    return written
