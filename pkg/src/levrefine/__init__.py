"""Exact Levenshtein-type bounds for q-ary codes and their grid refinement."""

from .codes import distance_distribution, enumerate_candidates, integrality_test
from .delsarte_lp import lp_bound
from .kkt import certify
from .krawtchouk import Space, expand
from .levenshtein import classify, lev_bound, lev_roots
from .numkit import DensePoly, Rational
from .refine import BoundReport, closed3, closed4, refined_bound

__all__ = [
    "BoundReport",
    "DensePoly",
    "Rational",
    "Space",
    "certify",
    "classify",
    "closed3",
    "closed4",
    "distance_distribution",
    "enumerate_candidates",
    "expand",
    "integrality_test",
    "lev_bound",
    "lev_roots",
    "lp_bound",
    "refined_bound",
]
