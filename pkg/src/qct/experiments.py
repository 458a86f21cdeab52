"""Deterministic experiments reproducing every quantitative claim as report rows.

Each row compares a measured value against a bound in a stated direction;
wall times are tracked separately so report bodies stay byte-identical for a
fixed configuration and seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import applications as ap
from . import channels as ch
from . import protocol as pr
from . import reduction as red
from . import verifier as vf
from .circuits import GateOp, MixedStateCircuit
from .states import (
    HermitianObservable,
    basis_state,
    random_density_operator,
    random_pure_state,
    trace_norm,
)


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    claim: str
    measured: float
    bound: float
    direction: str  # "<=" or ">="
    passed: bool
    ms: float

    def body_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "claim": self.claim,
            "measured": self.measured,
            "bound": self.bound,
            "direction": self.direction,
            "pass": self.passed,
        }


def _row(experiment: str, claim: str, measured: float, bound: float, direction: str, t0: float) -> ReportRow:
    measured = float(measured)
    bound = float(bound)
    passed = measured <= bound if direction == "<=" else measured >= bound
    return ReportRow(
        experiment=experiment,
        claim=claim,
        measured=measured,
        bound=bound,
        direction=direction,
        passed=passed,
        ms=(time.perf_counter() - t0) * 1000.0,
    )


def _bounded_observable(dim: int, seed) -> HermitianObservable:
    """Random observable squeezed into the operator interval [0, 1]."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    herm = g + g.conj().T
    herm /= np.linalg.norm(herm, 2)
    return HermitianObservable((herm + np.eye(dim)) / 2)


# ---------------------------------------------------------------------------
# norms experiment
# ---------------------------------------------------------------------------


def norms_experiment(seed: int, restarts: int = 20) -> list[ReportRow]:
    rows: list[ReportRow] = []

    for n in (1, 2):
        t0 = time.perf_counter()
        avg = ch.key_average(ch.pauli_otp_family(n))
        dev = float(np.max(np.abs(avg.choi - ch.depolarizing(n).choi)))
        rows.append(_row("norms", f"Eq1-key-average-n{n}", dev, 1e-12, "<=", t0))

    t0 = time.perf_counter()
    dims = [2, 4, 8]
    worst = -math.inf
    for i in range(200):
        dim = dims[i % 3]
        x = _bounded_observable(dim, (seed, 10, i))
        rho = random_density_operator(dim, (seed, 11, i))
        sigma = random_density_operator(dim, (seed, 12, i))
        lhs = x.expectation(rho)
        rhs = x.expectation(sigma) + trace_norm(rho.matrix - sigma.matrix)
        worst = max(worst, lhs - rhs)
    rows.append(_row("norms", "Lemma1-measurement-continuity", worst, 1e-9, "<=", t0))

    for d in (2, 4):
        t0 = time.perf_counter()
        st = pr.build_swap_test(d)
        dev = 0.0
        for i in range(20):
            a = random_pure_state(d, (seed, 20, d, i))
            b = random_pure_state(d, (seed, 21, d, i))
            p = st.symmetric_probability(
                np.kron(a.density().matrix, b.density().matrix)
            )
            law = (1 + abs(a.overlap(b)) ** 2) / 2
            dev = max(dev, abs(p - law))
        rows.append(_row("norms", f"SwapTest-pure-D{d}", dev, 1e-9, "<=", t0))
        t0 = time.perf_counter()
        dev = 0.0
        for i in range(20):
            r1 = random_density_operator(d, (seed, 22, d, i)).matrix
            r2 = random_density_operator(d, (seed, 23, d, i)).matrix
            p = st.symmetric_probability(np.kron(r1, r2))
            law = (1 + float(np.real(np.trace(r1 @ r2)))) / 2
            dev = max(dev, abs(p - law))
        rows.append(_row("norms", f"SwapTest-mixed-D{d}", dev, 1e-9, "<=", t0))

    diamond_cases = [
        ("Diamond-id-vs-depolarizing-1q", ch.identity_channel(1), ch.depolarizing(1), 1.5),
        ("Diamond-id-vs-depolarizing-2q", ch.identity_channel(2), ch.depolarizing(2), 1.875),
        (
            "Diamond-id-vs-pauli-x",
            ch.identity_channel(1),
            ch.to_channel(ch.pauli_x_first_circuit(1)),
            2.0,
        ),
    ]
    for claim, a, b, target in diamond_cases:
        t0 = time.perf_counter()
        dd = ch.diamond_distance(a, b, restarts=restarts, seed=seed)
        rows.append(_row("norms", claim, abs(dd.lower_bound - target), 1e-6, "<=", t0))
    return rows


# ---------------------------------------------------------------------------
# reduction experiment
# ---------------------------------------------------------------------------


def reduction_experiment(seed: int, eps: float = 0.04, restarts: int = 20) -> list[ReportRow]:
    rows: list[ReportRow] = []

    t0 = time.perf_counter()
    exact_dev = 0.0
    majorant_margin = -math.inf
    for p in np.linspace(0.05, 0.95, 10):
        p = float(p)
        v = vf.make_toy_verifier("rotation", accept_probability=p)
        phi, phi_prime = red.copy_stage_states(v, basis_state(2, 1))
        branch0 = np.kron(np.array([1, 0], dtype=complex), phi)
        branch1 = np.kron(np.array([0, 1], dtype=complex), phi)
        d0 = trace_norm(
            np.outer(phi_prime, phi_prime.conj()) - np.outer(branch0, branch0.conj())
        )
        d1 = trace_norm(
            np.outer(phi_prime, phi_prime.conj()) - np.outer(branch1, branch1.conj())
        )
        yes_form, no_form = red.copy_distortion_bounds(p)
        exact_dev = max(exact_dev, abs(d1 - yes_form), abs(d0 - no_form))
        majorant_margin = max(
            majorant_margin,
            yes_form - 3 * math.sqrt(1 - p),
            no_form - 3 * math.sqrt(p),
        )
    rows.append(_row("reduction", "Eq2-Eq3-copy-distortion", exact_dev, 1e-9, "<=", t0))
    t0 = time.perf_counter()
    rows.append(_row("reduction", "Eq2-Eq3-majorant-strict", majorant_margin, 0.0, "<=", t0))

    v_yes = vf.make_toy_verifier("rotation", accept_probability=1.0 - eps)
    bound = 3 * math.sqrt(eps)
    subspace_deficit = -math.inf
    for delta, tag in ((1.0, "delta-1"), (0.5, "delta-half")):
        t0 = time.perf_counter()
        inst = red.build_ct_circuit(v_yes, "identity", "depolarizing", eps, delta)
        cert = red.certify_yes(inst, v_yes, seed=seed)
        rows.append(_row("reduction", f"Prop1-rotation-{tag}", cert.measured_bound, bound, "<=", t0))
        h, f = inst.witness_qubits, inst.dummy_qubits
        subspace_deficit = max(subspace_deficit, (h + f) * (1 - delta) - f)
    t0 = time.perf_counter()
    rows.append(
        _row("reduction", "Prop1-subspace-dimension-log2-deficit", subspace_deficit, 0.0, "<=", t0)
    )

    t0 = time.perf_counter()
    v_target = vf.make_toy_verifier("target_state", witness_qubits=1, target=1)
    inst = red.build_ct_circuit(v_target, "identity", "depolarizing", eps, 1.0)
    cert = red.certify_yes(inst, v_target, seed=seed)
    rows.append(_row("reduction", "Prop1-target-state-exact", cert.measured_bound, 1e-9, "<=", t0))

    t0 = time.perf_counter()
    v_reject = vf.make_toy_verifier("always_reject", witness_qubits=1)
    inst = red.build_ct_circuit(v_reject, "identity", "depolarizing", eps, 1.0)
    cert = red.certify_no(inst, v_reject, restarts=restarts, seed=seed, samples=50)
    rows.append(
        _row("reduction", "Prop2-always-reject-sampled", max(cert.probe_distances), 1e-9, "<=", t0)
    )

    t0 = time.perf_counter()
    v_low = vf.make_toy_verifier("rotation", accept_probability=eps)
    inst = red.build_ct_circuit(v_low, "identity", "depolarizing", eps, 1.0)
    cert = red.certify_no(inst, v_low, restarts=restarts, seed=seed, samples=50)
    rows.append(
        _row("reduction", "Prop2-rotation-sampled", max(cert.probe_distances), bound, "<=", t0)
    )
    t0 = time.perf_counter()
    rows.append(
        _row(
            "reduction",
            "Prop2-rotation-diamond-ascent",
            cert.diamond_lower_bound,
            bound + 1e-6,
            "<=",
            t0,
        )
    )
    return rows


# ---------------------------------------------------------------------------
# applications experiment
# ---------------------------------------------------------------------------


def applications_experiment(seed: int, restarts: int = 10) -> list[ReportRow]:
    rows: list[ReportRow] = []

    t0 = time.perf_counter()
    t_gate = ch.to_channel(MixedStateCircuit(1, (GateOp.t(0),), 1))
    verdict = ap.min_output_entropy(t_gate, restarts=restarts, seed=seed)
    rows.append(_row("applications", "MOE-unitary-zero", verdict.statistic, 1e-9, "<=", t0))

    for n in (1, 2):
        t0 = time.perf_counter()
        verdict = ap.min_output_entropy(ch.depolarizing(n), restarts=restarts, seed=seed)
        rows.append(
            _row("applications", f"MOE-depolarizing-n{n}", abs(verdict.statistic - n), 1e-9, "<=", t0)
        )

    t0 = time.perf_counter()
    half = ch.mix([ch.identity_channel(1), ch.depolarizing(1)], [0.5, 0.5])
    verdict = ap.min_output_entropy(half, restarts=restarts, seed=seed)
    grid = ap.bloch_grid_min_entropy(half, resolution=32)
    rows.append(
        _row("applications", "MOE-half-depolarizing-vs-grid", abs(verdict.statistic - grid), 1e-3, "<=", t0)
    )

    t0 = time.perf_counter()
    verdict = ap.pure_fixed_point_search(ch.identity_channel(1), 0.01, restarts=restarts, seed=seed)
    rows.append(_row("applications", "PFP-identity", verdict.statistic, 1e-9, "<=", t0))

    t0 = time.perf_counter()
    mx = ch.to_channel(ap.measure_then_flip_circuit())
    verdict = ap.pure_fixed_point_search(mx, 0.01, restarts=restarts, seed=seed)
    rows.append(
        _row("applications", "PFP-measure-then-flip", verdict.statistic, 1.0 - 1e-6, ">=", t0)
    )

    t0 = time.perf_counter()
    tr_chan = ch.to_channel(MixedStateCircuit(2, (GateOp.trace_out(1),), 1))
    verdict = ap.nonisometry_stat(tr_chan, 0.1, restarts=5, seed=seed)
    rows.append(
        _row("applications", "NonIsometry-trace-one-of-two", verdict.statistic, 0.5 + 1e-9, "<=", t0)
    )
    return rows


# ---------------------------------------------------------------------------
# di-protocol experiment
# ---------------------------------------------------------------------------


def di_protocol_experiment(
    seed: int, shots: int = 100_000, restarts: int = 20, message_qubits: int = 1
) -> list[ReportRow]:
    n = message_qubits
    soundness_target = 0.5 + 1.0 / (2 * 2**n)
    rows: list[ReportRow] = []

    t0 = time.perf_counter()
    insecure = pr.build_identity_instance(n, 0.01)
    psi = random_pure_state(4**n, (seed, 1))
    complete = pr.exact_accept_probability(insecure, pr.two_copy_proof(psi), "psi-tensor-psi")
    rows.append(
        _row("di-protocol", "Protocol1-completeness-exact", complete.probability, 1.0 - 1e-9, ">=", t0)
    )

    t0 = time.perf_counter()
    secure = pr.build_secure_instance(n, 0.01)
    p_star, best_proof = pr.optimal_proof_accept(secure)
    rows.append(
        _row("di-protocol", "Protocol1-soundness-exact", abs(p_star - soundness_target), 1e-9, "<=", t0)
    )

    t0 = time.perf_counter()
    sampled = pr.run_protocol_sampled(
        secure, best_proof.density(), shots=shots, seed=seed, proof_spec="optimal"
    )
    lo, hi = sampled.ci95
    rows.append(
        _row("di-protocol", "Protocol1-soundness-sampled-wilson-low", lo, soundness_target, "<=", t0)
    )
    t0 = time.perf_counter()
    rows.append(
        _row("di-protocol", "Protocol1-soundness-sampled-wilson-high", hi, soundness_target, ">=", t0)
    )

    t0 = time.perf_counter()
    gap = complete.probability - p_star
    rows.append(
        _row("di-protocol", "Protocol1-gap", gap, 0.5 - 1.0 / (2 * 2**n) - 1e-6, ">=", t0)
    )

    t0 = time.perf_counter()
    otp_report = ch.check_eps_private(
        pr.build_secure_instance(1, 0.01).family,
        ch.pauli_otp_decryptor(1),
        eps=0.01,
        restarts=restarts,
        seed=seed,
    )
    rows.append(
        _row(
            "di-protocol",
            "EpsPrivate-OTP-verdict-consistent",
            1.0 if otp_report.verdict == ch.VERDICT_CONSISTENT else 0.0,
            1.0,
            ">=",
            t0,
        )
    )
    t0 = time.perf_counter()
    rows.append(_row("di-protocol", "EpsPrivate-OTP-d1", otp_report.d1, 1e-9, "<=", t0))
    t0 = time.perf_counter()
    rows.append(_row("di-protocol", "EpsPrivate-OTP-d2", otp_report.d2, 1e-9, "<=", t0))

    t0 = time.perf_counter()
    leaky = pr.build_identity_instance(1, 0.1)
    leaky_report = ch.check_eps_private(
        leaky.family,
        ch.identity_keyed_family(1, 2),
        eps=0.1,
        restarts=restarts,
        seed=seed,
    )
    rows.append(
        _row(
            "di-protocol",
            "EpsPrivate-identity-family-verdict-violates",
            1.0 if leaky_report.verdict == ch.VERDICT_VIOLATES else 0.0,
            1.0,
            ">=",
            t0,
        )
    )
    t0 = time.perf_counter()
    rows.append(
        _row("di-protocol", "EpsPrivate-identity-family-d2", leaky_report.d2, 1.5 - 1e-9, ">=", t0)
    )
    return rows


EXPERIMENTS = {
    "norms": norms_experiment,
    "reduction": reduction_experiment,
    "applications": applications_experiment,
    "di-protocol": di_protocol_experiment,
}


def full_suite(seed: int, shots: int = 100_000, restarts: int = 20) -> list[ReportRow]:
    rows: list[ReportRow] = []
    rows.extend(norms_experiment(seed, restarts=restarts))
    rows.extend(reduction_experiment(seed, restarts=restarts))
    rows.extend(applications_experiment(seed))
    rows.extend(di_protocol_experiment(seed, shots=shots, restarts=restarts))
    return rows
