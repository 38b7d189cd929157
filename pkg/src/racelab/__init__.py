"""racelab: prime-race barriers from hypothetical L-function zeros.

Construct and verify zero configurations constraining the orderings of the
prime counting functions pi_{q,a}(x), search trigonometric polynomials for
certified sign patterns, and cross-check against real primes at desk scale.
"""

from .residues import (DirichletCharacter, ResidueGroup, character_with_value,
                       characters, sqrt_count, unit_group)
from .trigpoly import TrigPoly, SearchCertificate
from .zerosys import Zero, ZeroSystem, dominant_data, g_rho, load_zero_data
from .simulator import (RaceFunctionSet, dominant_profile, f_rho, race_values,
                        corollary13_sum, theorem_decomposition, trace)
from .barriers import (BarrierRecipe, build_extremal, build_thm311,
                       build_thm51, check_hypotheses, qpr_polys,
                       solve_lemma44, verify_thm311)
from .orderings import OrderingTrace, census, turan_graph_bound, verdict
from .primes import PrimeRaceTable, first_lead_change, sieve_race

__version__ = "0.1.0"

__all__ = [
    "BarrierRecipe", "DirichletCharacter", "OrderingTrace", "PrimeRaceTable",
    "RaceFunctionSet", "ResidueGroup", "SearchCertificate", "TrigPoly",
    "Zero", "ZeroSystem", "build_extremal", "build_thm311", "build_thm51",
    "census", "character_with_value", "characters", "check_hypotheses",
    "corollary13_sum", "dominant_data", "dominant_profile",
    "first_lead_change", "f_rho", "g_rho", "load_zero_data", "qpr_polys",
    "race_values", "sieve_race", "solve_lemma44", "sqrt_count",
    "theorem_decomposition", "trace", "turan_graph_bound", "unit_group",
    "verdict", "verify_thm311",
]
