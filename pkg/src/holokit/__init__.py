"""Numerical tools for invariant distances and fixed points of holomorphic maps."""

from .disc import Mobius, poincare_distance
from .domains import Annulus, NormBall, Polydisc, parse_domain, unit_disc
from .expr import parse_map
from .fixed_points import earle_hamilton, fix_scan, lambda_retraction, retract_to_fix
from .geodesics import complex_extreme_test, geodesic_search
from .linearization import cartan_chart, finite_group_average_chart, iterate_average_chart
from .metrics import distance_bracket, integrated_distance

__all__ = [
    "Annulus",
    "Mobius",
    "NormBall",
    "Polydisc",
    "cartan_chart",
    "complex_extreme_test",
    "distance_bracket",
    "earle_hamilton",
    "finite_group_average_chart",
    "fix_scan",
    "geodesic_search",
    "integrated_distance",
    "iterate_average_chart",
    "lambda_retraction",
    "parse_domain",
    "parse_map",
    "poincare_distance",
    "retract_to_fix",
    "unit_disc",
]
