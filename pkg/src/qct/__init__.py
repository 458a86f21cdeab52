"""Desk-scale simulation and certification toolkit for mixed-state circuits,
keyed quantum encryption, circuit-testing reductions, and the swap-test
verification protocol."""

from .applications import (
    ProblemVerdict,
    bloch_grid_min_entropy,
    measure_then_flip_circuit,
    min_output_entropy,
    nonidentity_stat,
    nonisometry_stat,
    pure_fixed_point_search,
)
from .channels import (
    DiamondResult,
    EpsPrivateReport,
    KeyedChannelFamily,
    QuantumChannel,
    check_eps_private,
    compose,
    depolarizing,
    depolarizing_circuit,
    diamond_distance,
    identity_channel,
    identity_keyed_family,
    key_average,
    mix,
    pauli_keyed,
    pauli_otp_decryptor,
    pauli_otp_family,
    pauli_x_first_circuit,
    random_channel,
    tensor_channels,
    to_channel,
    trace_distance_no_reference,
)
from .circuits import (
    CanonicalCircuit,
    GateOp,
    MixedStateCircuit,
    canonicalize,
    concatenate,
    evaluate,
    expand_template,
    identity_circuit,
    parse_circuit,
    serialize_circuit,
)
from .errors import (
    BudgetExceededError,
    CapacityError,
    CircuitError,
    CircuitParseError,
    DimensionMismatchError,
    InvalidStateError,
    QctError,
    UnsupportedGateError,
    WrongSideError,
    max_qubits,
)
from .protocol import (
    DIInstance,
    ProtocolResult,
    SwapTest,
    build_identity_instance,
    build_insecure_instance,
    build_secure_instance,
    build_swap_test,
    exact_accept_probability,
    optimal_proof_accept,
    run_protocol_sampled,
    two_copy_proof,
    wilson_interval,
)
from .reduction import (
    CTCertificate,
    CTInstance,
    build_ct_circuit,
    certify_no,
    certify_yes,
    copy_distortion_bounds,
    copy_stage_states,
    dummy_qubit_count,
    family_generator,
    wellformedness_check,
)
from .states import (
    DensityOperator,
    HermitianObservable,
    PureState,
    RegisterLayout,
    basis_state,
    operator_norm,
    partial_trace,
    purify,
    random_density_operator,
    random_pure_state,
    random_unitary,
    tensor,
    trace_norm,
    von_neumann_entropy,
)
from .verifier import (
    VerifierCircuit,
    accept_probability,
    acceptance_operator,
    make_toy_verifier,
    max_accept_probability,
    rotation_angle_for_accept_probability,
    verifier_from_json,
    verifier_to_json,
)

__version__ = "0.1.0"
