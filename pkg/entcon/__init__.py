"""Entcon: concentration of entanglement for random states under local noise."""

__version__ = "0.1.0"

from .channels import (
    Dilation,
    LocalProductChannel,
    QuantumChannel,
    apply_channel,
    dephasing_qubit,
    local_dephasing,
    markov_p,
)
from .concentration import (
    BoundInputs,
    EnsembleStatistics,
    ExperimentConfig,
    fit_log_std,
    levy_bound,
    negativity_bound,
    run_ensemble,
)
from .entanglement import BipartiteSplit, negativity, normalized_negativity
from .errors import EntconError
from .linalg import TOLERANCES, Tolerances
from .states import DensityMatrix, PureState, RngStream, sample_haar_pure
