"""Quantum history vectors: amplitudes, history density matrices, temporal
entanglement, and Leggett-Garg / temporal CHSH tests."""
from .density import (
    CompositeHistorySpec,
    HistoryDensityMatrix,
    HistoryEnsemble,
    density_from_ensemble,
    history_product,
    is_product_history,
    probability_from_density,
    pure_density,
    schmidt_spectrum,
    space_reduce,
    space_reduce_density,
    time_reduce,
    von_neumann_entropy,
)
from .engine import (
    HistorySpec,
    HistoryVector,
    ObservableSpec,
    ProjectorSet,
    amplitude,
    build_history_vector,
    chain_operator,
    decoherence_functional,
    is_consistent_set,
    marginal_checks,
    reduce_schedule,
    sequence_probability,
)
from .errors import EnumerationCapError, NumericalContractError, PostselectionError, ValidationError
from .inequalities import (
    DichotomicSchedule,
    chsh_evaluate,
    interference_term,
    lg_evaluate,
    lg_interference_decomposition,
    precession_schedule,
    two_time_correlator,
)
from .observables import (
    HistoryOperator,
    MultitimeProjector,
    history_expectation,
    local_nonbasis_probability,
    multitime_average,
    multitime_probability,
    nonbasis_report,
    two_time_intermediate_state,
)
from .protocol import clone_gate, run_protocol, verify_protocol_equivalence
from .tensor import LabeledSpace, check_unitary, hermitian_eig, partial_trace, tensor_product

__version__ = "0.1.0"
