"""Series arithmetic, special constants and small complex linear algebra."""
from .constants import euler_gamma, log_gamma_taylor, zeta
from .linalg import DEFAULT_TOL, matrix_exp_poly, rank
from .series import LaurentSeries, TruncatedSeries, series_exp, series_log, series_mul

__all__ = [
    "DEFAULT_TOL",
    "LaurentSeries",
    "TruncatedSeries",
    "euler_gamma",
    "log_gamma_taylor",
    "matrix_exp_poly",
    "rank",
    "series_exp",
    "series_log",
    "series_mul",
    "zeta",
]
