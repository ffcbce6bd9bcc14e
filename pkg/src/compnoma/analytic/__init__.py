"""Numerical evaluation of the stochastic-geometry expressions (association, coverage, rate)."""

from .coverage import (case_coverage, coverage_breakdown, coverage_comp, coverage_noncomp,
                       coverage_total_au, coverage_tu)
from .distances import (assoc_prob, assoc_probs, conditional_pdf, joint_pdf, nearest_cdf,
                        nearest_pdf)
from .laplace import (GammaSurrogate, LaplaceKernel, coverage_sum, gamma_match,
                      laplace_kernel)
from .quadrature import QuadratureError, QuadratureSpec
from .rates import rate_case, rate_totals, rate_tu

__all__ = [
    "GammaSurrogate", "LaplaceKernel", "QuadratureError", "QuadratureSpec",
    "assoc_prob", "assoc_probs", "case_coverage", "conditional_pdf", "coverage_breakdown",
    "coverage_comp", "coverage_noncomp", "coverage_sum", "coverage_total_au", "coverage_tu",
    "gamma_match", "joint_pdf", "laplace_kernel", "nearest_cdf", "nearest_pdf",
    "rate_case", "rate_totals", "rate_tu",
]
