"""Finite three-term-recursion machinery for quasi-exactly solvable
Schrodinger problems.

The package derives recursion coefficients from a (coordinate map, weight)
pair, imposes truncation constraints, computes energy and parameter spectra
from the resulting finite tridiagonal representations, and verifies every
closed form against an independent Schrodinger-residual oracle.
"""

from qes.catalog import PROBLEM_NAMES, bender_dunne_point, build_problem
from qes.constraints import (
    DIAG_A,
    DIAG_B,
    OFFMINUS_ENERGY,
    OFFMINUS_PARAM,
    OFFPLUS_ENERGY,
    OFFPLUS_PARAM,
    ConstraintChoice,
    apply_constraint,
    verify_reduction,
)
from qes.laurent import LaurentSum, evaluate, derivative_in_y, multiply, normalize
from qes.measures import (
    factorization_check,
    norm_formula,
    orthogonality_deviation,
    problem_measure,
)
from qes.spectra import energy_spectrum, parameter_spectrum
from qes.wavefunction import (
    assemble,
    explain_residual,
    l2_norm,
    schrodinger_residual,
)

__all__ = [
    "LaurentSum",
    "evaluate",
    "derivative_in_y",
    "multiply",
    "normalize",
    "build_problem",
    "bender_dunne_point",
    "PROBLEM_NAMES",
    "ConstraintChoice",
    "apply_constraint",
    "verify_reduction",
    "DIAG_A",
    "DIAG_B",
    "OFFMINUS_PARAM",
    "OFFMINUS_ENERGY",
    "OFFPLUS_PARAM",
    "OFFPLUS_ENERGY",
    "energy_spectrum",
    "parameter_spectrum",
    "norm_formula",
    "orthogonality_deviation",
    "problem_measure",
    "factorization_check",
    "assemble",
    "schrodinger_residual",
    "explain_residual",
    "l2_norm",
]

__version__ = "0.1.0"
