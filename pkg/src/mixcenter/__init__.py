"""Centers of completely and jointly mixable distributions.

Bounds and exact intervals for admissible centers, a transportation
feasibility oracle for discrete marginals, and constructive samplers
emitting n standard Cauchy variates with a prescribed constant sum.
"""

from .center_bounds import (
    CenterInterval,
    CmBounds,
    DualBoundResult,
    JmBoundsInput,
    cauchy_avg_quantile_upper,
    cauchy_center_interval,
    cm_bounds,
    dual_bound,
    infinite_mean_classifier,
    jm_center_bounds,
    mean_inequality_holds,
)
from .cauchy_mix import (
    AdmissibilityResult,
    CauchyKernel,
    ConstructiveMixer,
    ConvexCombinationSampler,
    MixerConfig,
    ReflectedMixer,
    SampleBatch,
    SymmetricMixer,
    build_mixer,
    build_mixer_for_density,
    generic_admissibility,
)
from .discrete_mix import (
    CenterSet,
    Coupling,
    FeasibilityResult,
    center_two_excluded,
    enumerate_centers,
    exchangeable_permute,
    feasible_center,
    zero_one_couplings,
)
from .distributions import (
    AtomUniform,
    Cauchy,
    CountableMixture,
    FiniteDiscrete,
    GenericDensity,
    Pareto,
    PowerTwoGeometric,
    Uniform,
    avg_quantile,
    cauchy_inverse_density,
    cauchy_quantile,
    model_from_spec,
    point_mass,
    reflect,
)
from .errors import ConstructionError, DomainError, QuadratureError, SizeError
from .rearrangement import discretize, ra_flatten, sample_rows
from .seeding import substream
from .verify import (
    COUPLING_INVARIANTS,
    MIXER_INVARIANTS,
    SYMMETRIC_MIXER_INVARIANTS,
    VerificationReport,
    ks_distance,
    ks_threshold,
    ks_two_sample,
    run_invariant_suite,
    sum_stats,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
