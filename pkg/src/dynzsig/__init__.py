"""Dynamical divisibility sequences, primitive prime divisors, and Zsigmondy
sets of polynomial orbits over Q."""

from .divisibility import (
    DEFAULT_BUDGET,
    FactorBudget,
    Factorization,
    IdealPair,
    PrimitiveSplit,
    RigidReport,
    factor,
    has_primitive_divisor,
    ideal_pair,
    is_probable_prime,
    nonprimitive_bound_check,
    primitive_split,
    prime_to_s_norm,
    rigid_check,
    valuation,
)
from .heights import (
    ARCHIMEDEAN,
    HeightEstimate,
    Place,
    PlaceSet,
    canonical_height,
    chordal_metric,
    height_comparison_bound,
    local_log_distance,
    log_int,
    map_height,
    rational_height,
    sum_local_at_infinity,
    weil_height,
)
from .ratfield import (
    BigInteger,
    Polynomial,
    ProjPoint,
    Rational,
    RationalMap,
    as_rational,
    conjugate,
    derivative,
    is_powerful,
    poly_eval,
    poly_gcd,
    reverse_map,
    squarefree_decomposition,
)
from .zsigmondy import (
    BoundBreakdown,
    BoundInputs,
    DigitBudgetExceeded,
    FamilyFactor,
    FamilySpec,
    GrowthReport,
    HypothesisViolated,
    OrbitRecord,
    OrbitSequence,
    PreperiodicPoint,
    ValuationStabilityReport,
    build_sequence,
    check_term_lower_bound,
    check_term_upper_bound,
    close_approach_ambiguous,
    denominator_place_set,
    family_build,
    fixed_or_wandering,
    growth_check,
    history_cardinality_bound,
    history_indices,
    history_predicate,
    is_close_approach,
    startup_indices,
    startup_predicate,
    startup_threshold,
    valuation_stability_check,
    wandering_verdict,
    zsigmondy_bound,
    zsigmondy_set,
)

__version__ = "0.1.0"
