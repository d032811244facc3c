"""Matrix-free simulator for direct eigenvalue estimation of Pauli-sum
Hamiltonians: LCU block encoding of I - iH/kappa, oblivious amplitude
amplification, power construction by successive application or permutation
doubling, and iterative phase estimation."""

from .amplify import (
    AmplifiedOperator,
    amplified_block_error,
    apply_oaa_iterate,
    tune_repetitions,
)
from .lcu import (
    LcuOperator,
    ResourceReport,
    apply_block_unitary,
    apply_prepare,
    apply_select,
    build_lcu,
    choose_kappa,
    estimate_resources,
    extract_block,
)
from .pauli import (
    LadderOperator,
    PauliString,
    PauliSum,
    PauliTerm,
    build_h2,
    exact_spectrum,
    jordan_wigner,
    ladder_product,
    parse_hamiltonian,
    pauli_multiply,
    rank_one_decompose,
    serialize_hamiltonian,
    to_dense,
)
from .pea import (
    MemoryCapError,
    PeaConfig,
    PeaIterationRecord,
    PeaResult,
    feedback_angle,
    phase_from_bits,
    recover_energy,
    run_ipea,
)
from .state import (
    RegisterLayout,
    StateVector,
    apply_hadamard,
    apply_pauli_term,
    apply_phase_rotation,
    flip_if_nonzero,
    phase_qubit_statistics,
    prepare,
    project_ancilla_zero,
    reflect_about_zero,
)

__version__ = "0.1.0"
