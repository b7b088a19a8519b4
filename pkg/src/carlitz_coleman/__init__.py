"""Carlitz-module towers, Coleman's operators and the explicit reciprocity law.

The usual entry point is an instance: a prime pi of F_q[T] and the tower
of its torsion fields.

>>> from carlitz_coleman import make_field, PrimeSpec, Tower
>>> tower = Tower(PrimeSpec(make_field(3), "T"))
>>> w = tower.omega(1, 8)
>>> (w * w).to_scalar()
PadicScalar(pi^1*(2), rel 7)
"""

from .apoly import APoly, format_poly, parse_poly
from .carlitz import CarlitzMap, LambdaSeries, SkewPoly, lambda_eval, tower_degree
from .coleman import ColemanOps, NormSystem, TruncLaurent, coleman_solve, norm_budget, weierstrass_divide
from .errors import (AdmissibilityError, BudgetError, CarlitzError, ConsistencyError,
                     PrecisionError, ValuationAmbiguityError)
from .fields import FieldSpec, make_field
from .padic import PadicScalar
from .pairings import DirectLimitElem, PairingValue, Pairings
from .prime import PrimeSpec
from .tower import GaloisElem, TorsionValue, Tower, TowerElem

__all__ = [
    "APoly", "format_poly", "parse_poly",
    "CarlitzMap", "LambdaSeries", "SkewPoly", "lambda_eval", "tower_degree",
    "ColemanOps", "NormSystem", "TruncLaurent", "coleman_solve", "norm_budget", "weierstrass_divide",
    "AdmissibilityError", "BudgetError", "CarlitzError", "ConsistencyError",
    "PrecisionError", "ValuationAmbiguityError",
    "FieldSpec", "make_field", "PadicScalar",
    "DirectLimitElem", "PairingValue", "Pairings", "PrimeSpec",
    "GaloisElem", "TorsionValue", "Tower", "TowerElem",
]
