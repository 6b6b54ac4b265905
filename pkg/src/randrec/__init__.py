"""Recurrence and return-time experiments for random dynamical systems."""

__version__ = "0.1.0"

from .phase_space import InvalidInputError, Space, distance, in_ball, point
from .slopes import InsufficientDataError, geometric_grid
from .systems import (
    CATALOG,
    IID,
    AdditiveIID,
    BaseMapDriven,
    MarkovChain,
    NoiseStream,
    RandomSystem,
    StateError,
    apply_map,
    cat_maps,
    markov23,
    markov23_base_map,
    perturbed_circle,
    perturbed_interval,
    random_orbit,
    rotation_identity,
    sample_stationary_point,
    system_from_spec,
    validate_cat_map,
)
from .recurrence import (
    ReturnTimeQuery,
    annealed_rate,
    annealed_return_time,
    aperiodicity_atom,
    kac_check,
    noninstantaneous_equivalence,
    quenched_rate,
    quenched_return_time,
    return_time_to_set,
)
from .measure import (
    EmpiricalMeasure,
    LebesgueMeasure,
    WdrParams,
    build_empirical,
    dimension_summary,
    local_dimension,
    maximal_separated_set,
    wdr_check,
)
from .correlations import Observable, correlation, correlation_curve, decay_fit, lipschitz_norm
