"""Exact evaluation of normalizing constants, expectations and conditional
MLEs for two-way contingency tables with fixed marginal sums."""

from .errors import (
    ComputationError,
    FitError,
    InconsistentSamples,
    InputError,
    NonConvergence,
    ParseError,
    PoleError,
    ReconstructionFailure,
    SingularSystem,
)
from .exact import crt_combine, mod_reduce, parse_rational, rational_reconstruct
from .ratfun import Poly, RatFun, RatFunMatrix, parse_ratfun_expr
from .matfac import matfac, matfac_binsplit, matfac_exact, matfac_modular
from .tables import (
    MarginalSums,
    build_A,
    conditional_pmf,
    enumerate_fiber,
    expectations_naive,
    z_dp,
    z_naive,
)
from .gauss2f1 import contiguity_M, f21_poly_oracle, gauss_manin_2f1
from .driver import hgm_2x2, hgm_general, reduce_2x2
from .zeros import expectation_with_zeros, fit_rational_function
from .cmle import cmle_fit, conditional_loglik, generalized_odds_ratios

__version__ = "0.1.0"

__all__ = [
    "ComputationError",
    "FitError",
    "InconsistentSamples",
    "InputError",
    "NonConvergence",
    "ParseError",
    "PoleError",
    "ReconstructionFailure",
    "SingularSystem",
    "crt_combine",
    "mod_reduce",
    "parse_rational",
    "rational_reconstruct",
    "Poly",
    "RatFun",
    "RatFunMatrix",
    "parse_ratfun_expr",
    "matfac",
    "matfac_binsplit",
    "matfac_exact",
    "matfac_modular",
    "MarginalSums",
    "build_A",
    "conditional_pmf",
    "enumerate_fiber",
    "expectations_naive",
    "z_dp",
    "z_naive",
    "contiguity_M",
    "f21_poly_oracle",
    "gauss_manin_2f1",
    "hgm_2x2",
    "hgm_general",
    "reduce_2x2",
    "expectation_with_zeros",
    "fit_rational_function",
    "cmle_fit",
    "conditional_loglik",
    "generalized_odds_ratios",
]
