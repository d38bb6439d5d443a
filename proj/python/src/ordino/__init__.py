"""Bivariate ordered probit models with non-lattice threshold structures.

Arrays follow the command-line conventions: responses are 1-based integer
categories, covariate matrices have one row per observation. Structured
values (parameters, threshold structures, results) are plain dicts in the
same JSON layout the ``ordino`` tool reads and writes.
"""

from ._ordino import (
    NumericalError,
    UserError,
    bvn_cdf,
    cell_probabilities,
    design,
    fit,
    hierarchy,
    is_coherent,
    loglik,
    mrc,
    simulate,
)

__all__ = [
    "NumericalError",
    "UserError",
    "bvn_cdf",
    "cell_probabilities",
    "design",
    "fit",
    "hierarchy",
    "is_coherent",
    "loglik",
    "mrc",
    "simulate",
]
