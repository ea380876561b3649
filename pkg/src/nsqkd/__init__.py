"""No-signalling secure QKD with chained Bell tests.

Quantum correlations of Werner states, no-signalling boxes and their Bell
functionals, individual-attack weights, one-way key rates (with and without
bit-flip preprocessing) and a seeded Monte-Carlo protocol simulator.
"""

from nsqkd.exceptions import (
    GuardError,
    InputError,
    InsufficientDataError,
    SolverError,
    StructuralError,
)
from nsqkd.correlations import (
    MeasurementScheme,
    correlator,
    density_matrix_oracle,
    quantum_box,
)
from nsqkd.nsbox import (
    BellValue,
    ConditionalBox,
    DeterministicBox,
    chain_value,
    chsh_value,
    corr_value,
    enumerate_deterministic,
    min_chain_given_marginal,
    validate,
)
from nsqkd.attack import (
    STRATEGY_CLASSES,
    AttackDecomposition,
    StrategyClass,
    build_attack_mixture,
    eve_info_bound,
    intrinsic_info_upper,
    optimal_weights,
)
from nsqkd.keyrate import (
    KeyRateReport,
    binary_entropy,
    curve,
    key_rate_chain,
    key_rate_preprocessed,
    mutual_info_ab,
    threshold,
)
from nsqkd.simulator import (
    EveInfo,
    EstimationReport,
    ProtocolConfig,
    Round,
    Transcript,
    achievable_key_length,
    eve_accuracy,
    run,
)

__version__ = "0.1.0"
