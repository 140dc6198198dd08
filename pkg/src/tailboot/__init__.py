"""Bootstrap coverage of power-law tail estimates under heavy-tailed models."""

__version__ = "0.1.0"

from .bootstrap import BootstrapResult, bootstrap_ci
from .coverage import CoverageReport, StudySetup, figure_data, paper_setups, run_study, table_one
from .distributions import GPD, EmpiricalBody, MixedPowerLaw, PowerLaw, sample
from .fitting import Estimate, Given, TailFit, estimate_xmin, fit, fit_alpha
from .matcher import GridSpec, MatchResult, match_gpd, tail_distance
from .randomness import SeedSpec, derive_stream
from .tail_risk import CatastropheSpec, max_equivalence_gap, plug_in_p, true_p, true_p_mc
