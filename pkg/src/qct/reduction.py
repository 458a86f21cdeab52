"""Compile a verifier circuit and two circuit families into a circuit-testing
instance, and certify both sides of the promise numerically.

Wire plan of the compiled circuit (inputs low, ancillas above):

* wires ``0..h-1``        witness register H
* wires ``h..h+f-1``      dummy register F (ignored by the verifier)
* wires ``h+f..h+f+a-1``  shared ancilla register A (becomes the garbage G)
* wire  ``h+f+a``         the copy qubit

The instance applies V, copies its output qubit with a CNOT, undoes V, then
runs the first family's unitary when the copy reads one (the verifier
accepted) and the second family's unitary when it reads zero, and finally
traces out the copy and the ancillas.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channels import (
    depolarizing_circuit,
    diamond_distance,
    pauli_keyed,
    pauli_x_first_circuit,
    to_channel,
)
from .circuits import (
    GATE_CNOT,
    GateOp,
    MixedStateCircuit,
    canonicalize,
    evaluate,
    identity_circuit,
    parse_circuit,
    serialize_circuit,
)
from .errors import (
    CapacityError,
    CircuitError,
    DimensionMismatchError,
    WrongSideError,
    check_capacity,
    max_qubits,
)
from .states import (
    DensityOperator,
    PureState,
    RegisterLayout,
    apply_unitary_vec,
    basis_state,
    random_pure_state,
    trace_norm,
)
from .verifier import VerifierCircuit, max_accept_probability

FamilyGenerator = Callable[[int], MixedStateCircuit]

FAMILY_REGISTRY: dict[str, Callable[..., FamilyGenerator]] = {
    "identity": lambda: identity_circuit,
    "depolarizing": lambda: depolarizing_circuit,
    "pauli_x_first": lambda: pauli_x_first_circuit,
    "pauli_keyed": lambda key: (lambda width: pauli_keyed(width, key)),
}


def family_generator(name: str, **params) -> FamilyGenerator:
    """Look up a named circuit family; ``pauli_keyed`` takes a ``key`` parameter."""
    if name not in FAMILY_REGISTRY:
        raise KeyError(f"unknown family {name!r}; known: {sorted(FAMILY_REGISTRY)}")
    return FAMILY_REGISTRY[name](**params)


def dummy_qubit_count(witness_qubits: int, delta: float) -> int:
    """Dummy-register size: the qubit form of the dimension rule."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    if delta == 1.0:
        return 0
    raw = witness_qubits * (1.0 - delta) / delta
    return int(math.ceil(raw - 1e-12))


@dataclass(frozen=True)
class CTInstance:
    """A compiled circuit-testing instance with its parameters and layout."""

    circuit: MixedStateCircuit
    c0: MixedStateCircuit
    c1: MixedStateCircuit
    eps: float
    delta: float
    layout: RegisterLayout
    witness_qubits: int
    dummy_qubits: int
    ancilla_qubits: int
    c0_spec: dict | None = None
    c1_spec: dict | None = None

    def __post_init__(self):
        h, f = self.witness_qubits, self.dummy_qubits
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must be in (0, 1), got {self.eps}")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")
        if f != dummy_qubit_count(h, self.delta):
            raise CircuitError(
                f"dummy register has {f} qubits, dimension rule needs "
                f"{dummy_qubit_count(h, self.delta)}"
            )
        if self.circuit.input_qubits != h + f:
            raise CircuitError(
                f"instance circuit takes {self.circuit.input_qubits} qubits, "
                f"expected h + f = {h + f}"
            )
        for label, fam in (("c0", self.c0), ("c1", self.c1)):
            if fam.input_qubits != h + f or fam.output_qubits != self.circuit.output_qubits:
                raise CircuitError(f"{label} widths do not match the instance circuit")

    @property
    def input_qubits(self) -> int:
        return self.witness_qubits + self.dummy_qubits

    @property
    def total_qubits(self) -> int:
        return self.witness_qubits + self.dummy_qubits + self.ancilla_qubits + 1

    def bound(self) -> float:
        """The claimed closeness bound, three times the square root of eps."""
        return 3.0 * math.sqrt(self.eps)

    def to_json(self) -> dict:
        if self.c0_spec is None or self.c1_spec is None:
            raise ValueError("only instances built from registry families serialize")
        return {
            "circuit": json.loads(serialize_circuit(self.circuit).decode("utf-8")),
            "c0": self.c0_spec,
            "c1": self.c1_spec,
            "eps": self.eps,
            "delta": self.delta,
            "witness_qubits": self.witness_qubits,
            "dummy_qubits": self.dummy_qubits,
            "ancilla_qubits": self.ancilla_qubits,
            "layout": {
                "registers": [list(r) for r in self.layout.registers],
                "convention": self.layout.convention,
            },
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CTInstance":
        h = int(doc["witness_qubits"])
        f = int(doc["dummy_qubits"])
        width = h + f
        c0 = family_generator(doc["c0"]["name"], **doc["c0"].get("params", {}))(width)
        c1 = family_generator(doc["c1"]["name"], **doc["c1"].get("params", {}))(width)
        return cls(
            circuit=parse_circuit(json.dumps(doc["circuit"])),
            c0=c0,
            c1=c1,
            eps=float(doc["eps"]),
            delta=float(doc["delta"]),
            layout=RegisterLayout(
                tuple((n, c) for n, c in doc["layout"]["registers"]),
                doc["layout"].get("convention", "qubit0-lsb"),
            ),
            witness_qubits=h,
            dummy_qubits=f,
            ancilla_qubits=int(doc["ancilla_qubits"]),
            c0_spec=doc["c0"],
            c1_spec=doc["c1"],
        )


@dataclass(frozen=True)
class CTCertificate:
    """Numerical evidence for one side of the circuit-testing promise."""

    side: str
    measured_bound: float
    claimed_bound: float
    passed: bool
    witness: PureState | None
    probe_distances: tuple[float, ...]
    subspace_dim_claimed: float | None = None
    subspace_dim_achieved: int | None = None
    diamond_lower_bound: float | None = None
    heuristic_consistent: bool | None = None
    seed: int | None = None


def _resolve_generator(gen) -> tuple[FamilyGenerator, dict | None]:
    if isinstance(gen, str):
        return family_generator(gen), {"name": gen, "params": {}}
    if isinstance(gen, tuple) and len(gen) == 2 and isinstance(gen[0], str):
        name, params = gen
        return family_generator(name, **params), {"name": name, "params": dict(params)}
    return gen, None


def _canonical_family(circuit: MixedStateCircuit, label: str):
    canon = canonicalize(circuit)
    anc_wires = set(
        range(circuit.input_qubits, circuit.input_qubits + canon.ancilla_qubits)
    )
    if set(canon.traced_wires) != anc_wires:
        raise CircuitError(
            f"{label} must trace exactly its ancilla wires so the compiled "
            f"circuit can share one garbage register"
        )
    return canon


def build_ct_circuit(
    v: VerifierCircuit,
    c0_gen,
    c1_gen,
    eps: float,
    delta: float,
) -> CTInstance:
    """Compile the verifier and two families into a circuit-testing instance.

    The accepting branch (copy qubit reads one) runs the first family and the
    rejecting branch runs the second; both controlled blocks share the padded
    ancilla register.
    """
    c0_gen, c0_spec = _resolve_generator(c0_gen)
    c1_gen, c1_spec = _resolve_generator(c1_gen)
    h = v.witness_qubits
    f = dummy_qubit_count(h, delta)
    width = h + f
    if width + 1 > max_qubits():
        raise CapacityError(
            f"delta {delta} forces a dummy register of {f} qubits; the instance "
            f"would need at least {width + 1} wires, above the cap of {max_qubits()}"
        )
    c0 = c0_gen(width)
    c1 = c1_gen(width)
    for label, fam in (("c0", c0), ("c1", c1)):
        if fam.input_qubits != width or fam.output_qubits != width:
            raise CircuitError(
                f"{label} must map {width} qubits to {width} qubits, got "
                f"{fam.input_qubits}->{fam.output_qubits}"
            )
    canon0 = _canonical_family(c0, "c0")
    canon1 = _canonical_family(c1, "c1")
    a = max(v.ancilla_qubits, canon0.ancilla_qubits, canon1.ancilla_qubits)
    total = width + a + 1
    check_capacity(total, f"circuit-testing instance (h={h}, f={f}, ancillas={a})")

    anc_start = width
    copy_wire = width + a
    v_targets = tuple(range(anc_start, anc_start + v.ancilla_qubits)) + tuple(range(h))
    out_wire = v_targets[v.output_qubit]

    ops: list[GateOp] = [GateOp.ancillas(a + 1)]
    ops.append(GateOp.unitary(v.unitary, v_targets))
    ops.append(GateOp.cnot(out_wire, copy_wire))
    ops.append(GateOp.unitary(v.unitary.conj().T, v_targets))
    ops.append(
        GateOp.controlled(
            copy_wire, canon0.unitary, tuple(range(width + canon0.ancilla_qubits))
        )
    )
    ops.append(GateOp.x(copy_wire))
    ops.append(
        GateOp.controlled(
            copy_wire, canon1.unitary, tuple(range(width + canon1.ancilla_qubits))
        )
    )
    ops.append(GateOp.x(copy_wire))
    ops.append(GateOp.trace_out(*range(anc_start, copy_wire + 1)))
    circuit = MixedStateCircuit(width, tuple(ops), width)

    registers: list[tuple[str, int]] = [("copy", 1)]
    if a:
        registers.append(("A", a))
    if f:
        registers.append(("F", f))
    registers.append(("H", h))
    return CTInstance(
        circuit=circuit,
        c0=c0,
        c1=c1,
        eps=eps,
        delta=delta,
        layout=RegisterLayout(tuple(registers)),
        witness_qubits=h,
        dummy_qubits=f,
        ancilla_qubits=a,
        c0_spec=c0_spec,
        c1_spec=c1_spec,
    )


# ---------------------------------------------------------------------------
# The copy-stage distortion identities
# ---------------------------------------------------------------------------


def copy_distortion_bounds(p: float) -> tuple[float, float]:
    """Trace distances of the post-copy state to the two branch states.

    Returns ``(yes_side, no_side)``: the distance to the copy-reads-one state
    ``2 sqrt(1 - p^2)`` and to the copy-reads-zero state
    ``2 sqrt(1 - (1-p)^2)``.  Each is strictly below its ``3 sqrt``
    majorant for p strictly inside (0, 1).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"acceptance probability {p} outside [0, 1]")
    yes_side = 2.0 * math.sqrt(max(0.0, 1.0 - p * p))
    no_side = 2.0 * math.sqrt(max(0.0, 1.0 - (1.0 - p) ** 2))
    return yes_side, no_side


def copy_stage_states(v: VerifierCircuit, psi: PureState) -> tuple[np.ndarray, np.ndarray]:
    """Explicit pre- and post-copy vectors for a witness: (phi, phi_prime).

    ``phi`` lives on the verifier's wires; ``phi_prime`` adds the copy qubit
    as the most significant wire.
    """
    if psi.dim != 2**v.witness_qubits:
        raise DimensionMismatchError("witness does not match the verifier width")
    zeros = np.zeros(2**v.ancilla_qubits, dtype=np.complex128)
    zeros[0] = 1.0
    psi0 = np.kron(psi.amplitudes, zeros)
    phi = v.unitary @ psi0
    n = v.total_qubits + 1
    state = np.kron(np.array([1.0, 0.0], dtype=np.complex128), phi)
    phi_prime = apply_unitary_vec(state, n, GATE_CNOT, [v.output_qubit, n - 1])
    return phi, phi_prime


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------


def _yes_probe_states(
    instance: CTInstance, witness: PureState, seed
) -> list[tuple[np.ndarray, int]]:
    """Pure probe vectors in the accepting subspace, with reference sizes."""
    h, f = instance.witness_qubits, instance.dummy_qubits
    gamma = witness.amplitudes
    probes: list[tuple[np.ndarray, int]] = []
    if f == 0:
        probes.append((gamma, 0))
        for s in range(2):
            ref = random_pure_state(2**h, (seed, s)).amplitudes
            probes.append((np.kron(gamma, ref), h))
        return probes
    dim_f = 2**f
    xis = [basis_state(dim_f, 0).amplitudes, basis_state(dim_f, min(1, dim_f - 1)).amplitudes]
    xis.append(random_pure_state(dim_f, (seed, 0)).amplitudes)
    for xi in xis:
        probes.append((np.kron(xi, gamma), 0))
    entangled = np.zeros(dim_f * 2**h * dim_f, dtype=np.complex128)
    for j in range(dim_f):
        e_j = np.zeros(dim_f, dtype=np.complex128)
        e_j[j] = 1.0
        entangled += np.kron(np.kron(e_j, gamma), e_j)
    entangled /= np.linalg.norm(entangled)
    probes.append((entangled, f))
    w = random_pure_state(dim_f * dim_f, (seed, 1)).amplitudes.reshape(dim_f, dim_f)
    rand_ent = np.zeros(dim_f * 2**h * dim_f, dtype=np.complex128)
    for j in range(dim_f):
        e_j = np.zeros(dim_f, dtype=np.complex128)
        e_j[j] = 1.0
        for r in range(dim_f):
            e_r = np.zeros(dim_f, dtype=np.complex128)
            e_r[r] = 1.0
            rand_ent += w[j, r] * np.kron(np.kron(e_j, gamma), e_r)
    rand_ent /= np.linalg.norm(rand_ent)
    probes.append((rand_ent, f))
    return probes


def certify_yes(instance: CTInstance, v: VerifierCircuit, seed=0) -> CTCertificate:
    """Probe the accepting subspace: the instance must track the first family.

    Uses the verifier's optimal witness, dummy-register probes in basis and
    random directions, and product plus reference-entangled variants.
    """
    p_star, witness = max_accept_probability(v)
    if p_star < 1.0 - instance.eps - 1e-9:
        raise WrongSideError(
            f"verifier accepts with at most {p_star}, need >= {1.0 - instance.eps}"
        )
    bound = instance.bound()
    distances = []
    for vec, ref in _yes_probe_states(instance, witness, seed):
        rho = DensityOperator(np.outer(vec, vec.conj()))
        lhs = evaluate(instance.circuit, rho, reference_qubits=ref)
        rhs = evaluate(instance.c0, rho, reference_qubits=ref)
        distances.append(trace_norm(lhs.matrix - rhs.matrix))
    h, f = instance.witness_qubits, instance.dummy_qubits
    dim_claimed = 2.0 ** ((h + f) * (1.0 - instance.delta))
    dim_achieved = 2**f
    measured = max(distances)
    passed = measured <= bound + 1e-9 and dim_achieved >= dim_claimed - 1e-9
    return CTCertificate(
        side="YES",
        measured_bound=measured,
        claimed_bound=bound,
        passed=passed,
        witness=witness,
        probe_distances=tuple(distances),
        subspace_dim_claimed=dim_claimed,
        subspace_dim_achieved=dim_achieved,
        seed=seed if isinstance(seed, int) else None,
    )


def certify_no(
    instance: CTInstance,
    v: VerifierCircuit,
    restarts: int = 20,
    seed=0,
    samples: int = 50,
) -> CTCertificate:
    """Probe the rejecting side: the instance must track the second family.

    Samples entangled inputs for trace-norm distances and runs the diamond
    ascent.  A lower bound below the threshold is recorded as consistent with
    the claim, not as a proof of it.
    """
    p_star, _ = max_accept_probability(v)
    if p_star > instance.eps + 1e-9:
        raise WrongSideError(
            f"verifier accepts with probability {p_star}, need <= {instance.eps}"
        )
    bound = instance.bound()
    width = instance.input_qubits
    distances = []
    for s in range(samples):
        psi = random_pure_state(4**width, (seed, s))
        rho = psi.density()
        lhs = evaluate(instance.circuit, rho, reference_qubits=width)
        rhs = evaluate(instance.c1, rho, reference_qubits=width)
        distances.append(trace_norm(lhs.matrix - rhs.matrix))
    dd = diamond_distance(
        to_channel(instance.circuit), to_channel(instance.c1), restarts, seed
    )
    measured = max(max(distances), dd.lower_bound)
    heuristic = dd.lower_bound <= bound + 1e-6
    passed = max(distances) <= bound + 1e-9 and heuristic
    return CTCertificate(
        side="NO",
        measured_bound=measured,
        claimed_bound=bound,
        passed=passed,
        witness=dd.witness,
        probe_distances=tuple(distances),
        diamond_lower_bound=dd.lower_bound,
        heuristic_consistent=heuristic,
        seed=seed if isinstance(seed, int) else None,
    )


@dataclass(frozen=True)
class WellformednessReport:
    """Sampled evidence that two families stay far apart on pure inputs."""

    min_distance: float
    flagged: bool
    probe_count: int
    eps: float
    delta: float
    subspace_note: str


def wellformedness_check(
    c0_gen,
    c1_gen,
    eps: float,
    delta: float,
    width: int,
    samples: int = 50,
    seed=0,
) -> WellformednessReport:
    """Sample pure inputs and flag families whose outputs ever come close.

    Probes include every computational basis state, the uniform plus and
    alternating-sign superpositions, and Haar samples.  For delta below one
    the subspace-dimension refinement is reported, not decided.
    """
    c0_gen, _ = _resolve_generator(c0_gen)
    c1_gen, _ = _resolve_generator(c1_gen)
    c0, c1 = c0_gen(width), c1_gen(width)
    dim = 2**width
    probes = [basis_state(dim, i).amplitudes for i in range(dim)]
    plus = np.ones(dim, dtype=np.complex128) / math.sqrt(dim)
    probes.append(plus)
    signs = np.array([(-1) ** bin(i).count("1") for i in range(dim)], dtype=np.complex128)
    probes.append(signs / math.sqrt(dim))
    for s in range(samples):
        probes.append(random_pure_state(dim, (seed, s)).amplitudes)
    min_distance = math.inf
    for vec in probes:
        rho = DensityOperator(np.outer(vec, vec.conj()))
        d = trace_norm(evaluate(c0, rho).matrix - evaluate(c1, rho).matrix)
        min_distance = min(min_distance, d)
    flagged = min_distance <= 2.0 * eps
    note = (
        "delta = 1: sampled pure states decide the promise directly"
        if delta == 1.0
        else "delta < 1: the subspace-dimension refinement is not machine-checked"
    )
    return WellformednessReport(
        min_distance=min_distance,
        flagged=flagged,
        probe_count=len(probes),
        eps=eps,
        delta=delta,
        subspace_note=note,
    )
