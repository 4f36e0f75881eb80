"""Exact local computations for GSp(4): parahoric Hecke eigenvectors,
Casselman-Shalika values, and local zeta-integral special values, verified
as identities of rational functions in the Hecke parameters."""

from .scalars import (
    Context,
    CyclotomicNumber,
    GeneratingSeries,
    Scalar,
    ZeroDivisorError,
    geom_sum,
    normalize,
    series_expand,
    specialize,
)

__all__ = [
    "Context",
    "CyclotomicNumber",
    "GeneratingSeries",
    "Scalar",
    "ZeroDivisorError",
    "geom_sum",
    "normalize",
    "series_expand",
    "specialize",
]

__version__ = "0.1.0"
