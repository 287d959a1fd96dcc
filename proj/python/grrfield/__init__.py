"""Rectangular-increment regularity toolkit.

Thin re-export of the compiled core: box increments on tensor-product grids,
the two-sided increment bound, exact Gaussian field sampling, and the heat
kernel integral family.
"""

from ._core import (
    b_functional,
    exp_moment_check,
    exp_moment_closed_form,
    grr_rhs,
    heat_cov,
    heat_sq_increment,
    heat_sq_increment_bound,
    increment_moment_mc,
    increment_variance,
    kernel_gap_integral,
    kernel_tail_brackets,
    kernel_time_integral,
    log_tail_integral,
    modulus_eval,
    modulus_inverse,
    rect_increment,
    rho,
    sample_field,
    sup_ratio,
    young_eval,
    young_inverse,
)

__all__ = [
    "b_functional",
    "exp_moment_check",
    "exp_moment_closed_form",
    "grr_rhs",
    "heat_cov",
    "heat_sq_increment",
    "heat_sq_increment_bound",
    "increment_moment_mc",
    "increment_variance",
    "kernel_gap_integral",
    "kernel_tail_brackets",
    "kernel_time_integral",
    "log_tail_integral",
    "modulus_eval",
    "modulus_inverse",
    "rect_increment",
    "rho",
    "sample_field",
    "sup_ratio",
    "young_eval",
    "young_inverse",
]

__version__ = "0.1.0"
