"""Root manifolds of polynomials over the real normed division algebras.

Subpackages cover exact Cayley-Dickson arithmetic, polynomials with left
coefficients and their potential landscape, root strata of central
polynomials, breathing-mode dynamics of trinomials, gradient-flow collapse
measurements, and Gibbs-measure thermodynamics.  The ``rootlab`` command
line drives reproducible experiments over all of it.
"""

from .algebra import (
    REALS,
    COMPLEX,
    QUATERNIONS,
    OCTONIONS,
    AlgebraTag,
    AlgebraElement,
    LinearMap,
    parse_tag,
)
from .poly import DAPolynomial, CentralQuadratic, Deformation

__all__ = [
    "REALS",
    "COMPLEX",
    "QUATERNIONS",
    "OCTONIONS",
    "AlgebraTag",
    "AlgebraElement",
    "LinearMap",
    "parse_tag",
    "DAPolynomial",
    "CentralQuadratic",
    "Deformation",
]
