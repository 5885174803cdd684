"""steinlab: desk-scale numerics for self-decomposable and stable laws.

Characteristic exponents in polar form, covariance-identity residuals,
the interpolating semigroup and its equation solver, non-local
carre-du-champs operators, Poincare-type inequalities, and the
variance-ratio functional whose value 1 pins the rotationally invariant
stable law.
"""

from ._errors import (
    DecayError,
    DomainError,
    EvaluationError,
    RegimeError,
    SteinlabError,
    UnsupportedFamilyError,
)

__version__ = "0.1.0"

__all__ = [
    "DecayError",
    "DomainError",
    "EvaluationError",
    "RegimeError",
    "SteinlabError",
    "UnsupportedFamilyError",
    "__version__",
]


def __getattr__(name):
    # lazy re-exports of the principal entry points
    from importlib import import_module

    top_level = {
        "isotropic_stable_law": "levy",
        "lk_exponent": "levy",
        "char_fn": "levy",
        "c_alpha_d": "levy",
        "gaussian_bump": "numerics",
        "gaussian_bump_library": "numerics",
        "uniform_sphere": "numerics",
        "sample_isotropic_stable": "sampling",
        "mc_expectation": "sampling",
        "stein_solve": "stein",
        "verify_stein_solution": "stein",
        "generator_apply": "stein",
        "semigroup_apply": "stein",
    }
    if name in top_level:
        return getattr(import_module(f".{top_level[name]}", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
