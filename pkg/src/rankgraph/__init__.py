"""rankgraph: exact rank certification and randomized exploration of random
graph adjacency matrices."""

from ._kernels import active_backend
from .anticoncentration import (
    AtomEstimate,
    CoefficientVector,
    decoupling_check,
    linear_atom_exact,
    linear_atom_signed,
    lo_scaling_experiment,
    quadratic_atom_mc,
)
from .errors import (
    BudgetError,
    ConfigError,
    ContractError,
    GraphParseError,
    ModeError,
    OracleLimitError,
    PersistenceError,
    RankToolError,
)
from .exact_rank import (
    CERTIFIED_DEFICIENT,
    CERTIFIED_EQUAL,
    DEFAULT_PRIMES,
    LOWER_BOUND_ONLY,
    BorderRankState,
    FieldMatrix,
    IntegerMatrix,
    PrimeModulus,
    RankCertificate,
    bareiss_determinant,
    border_rank_update,
    certify_rank,
    rank_mod_p,
    rational_rank,
)
from .experiments import (
    ExperimentConfig,
    dregular_experiment,
    emit_plot_script,
    estimate_g,
    load,
    persist,
    run_exposure_campaign,
    run_experiment,
    run_rank_equality,
    sweep_threshold,
)
from .exposure import (
    ExposureTrace,
    jump_statistics,
    supermartingale_check,
    trace_exposure,
)
from .graphs import (
    ExposureStream,
    Graph,
    RngSeed,
    complete,
    cycle,
    exposure_stream,
    gnp,
    parse_graph,
    path,
    random_regular,
    serialize_graph,
    star,
)
from .stats import wilson_interval
from .structure import (
    DeficiencyWitness,
    Thresholds,
    Verdict,
    find_witnesses,
    is_good,
    is_nice,
    is_normal_pair,
    is_small_set_expander,
    is_well_separated,
    isolated_count,
    thresholds,
)

__version__ = "0.1.0"
