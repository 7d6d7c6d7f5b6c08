"""Tail of the total completion time under RESTART failures."""

from ._core import (
    Distribution,
    RtailError,
    __version__,
    asymptote,
    classify,
    importance_tail,
    lundberg_root,
    moment_classify,
    n_pmf_diagonal,
    run,
    run_csv,
    semi_analytic_tail,
)

__all__ = [
    "Distribution",
    "RtailError",
    "__version__",
    "asymptote",
    "classify",
    "importance_tail",
    "lundberg_root",
    "moment_classify",
    "n_pmf_diagonal",
    "run",
    "run_csv",
    "semi_analytic_tail",
]
