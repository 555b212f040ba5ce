"""Pure-state tomography from weak values of eigenprojectors, with the geometry of the weak-value chart."""

from .errors import *  # noqa: F401,F403
from .geometry import (
    GeometryPoint,
    KahlerMetric,
    error_volume,
    kahler_potential,
    metric_from_kahler,
    metric_from_potential_fd,
    metric_pullback,
    volume_element,
    weighted_norm,
)
from .linalg import GeneratorBasis, make_generator_basis
from .optimizer import (
    OptimizationResult,
    maximize_avg_information,
    minimize_avg_error,
    sweep_simplex,
)
from .stateavg import (
    avg_error_coefficient,
    avg_error_volume_closed,
    avg_information,
    build_reduction,
    mc_state_average,
    mc_total_volume,
    total_volume_closed,
)
from .states import (
    DensityMatrix,
    PostSelection,
    PureState,
    RngSeed,
    SimplexWeights,
    density_from_state,
    fourier_mub,
    phase_fix,
    sample_haar_state,
    state_distance,
)
from .weakvalues import (
    PointerModel,
    WeakMeasurement,
    WeakValueVector,
    reconstruct_single_projector,
    reconstruct_state,
    simulate_weak_measurement,
    single_projector_weak_values,
    weak_values,
)

__version__ = "0.1.0"
