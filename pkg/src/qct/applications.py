"""Numerical checkers for the four circuit problems derived from circuit testing:
non-identity, non-isometry, pure fixed point, and minimum output entropy.

Each statistic is a search over pure inputs with seeded multi-restart
optimization; a Bloch-grid brute-force oracle at one qubit calibrates the
entropy search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .channels import (
    QuantumChannel,
    apply_choi_adjoint_to_segment,
    apply_choi_to_segment,
    diamond_distance,
    identity_channel,
)
from .circuits import GateOp, MixedStateCircuit
from .errors import DimensionMismatchError
from .states import (
    PureState,
    operator_norm,
    random_pure_state,
    trace_norm,
    von_neumann_entropy,
)

NON_IDENTITY = "NON_IDENTITY"
NON_ISOMETRY = "NON_ISOMETRY"
PURE_FIXED_POINT = "PURE_FIXED_POINT"
MIN_OUTPUT_ENTROPY = "MIN_OUTPUT_ENTROPY"


@dataclass(frozen=True)
class ProblemVerdict:
    problem: str
    statistic: float
    eps: float
    yes_bound: float
    no_bound: float
    consistent_with: str | None
    heuristic_only: bool
    witness: PureState
    seed: int | None
    notes: str = ""

    def __post_init__(self):
        if not math.isfinite(self.statistic):
            raise ValueError(f"statistic {self.statistic} is not finite")

    def to_row(self) -> dict:
        return {
            "problem": self.problem,
            "statistic": self.statistic,
            "eps": self.eps,
            "side": self.consistent_with,
            "witness": [[float(z.real), float(z.imag)] for z in self.witness.amplitudes],
            "seed": self.seed,
        }


def nonidentity_stat(
    channel: QuantumChannel, eps: float, restarts: int = 20, seed=0
) -> ProblemVerdict:
    """Diamond-distance lower bound from the identity.

    A bound at or above ``2 - eps`` certifies the far-from-identity side; a
    bound at or below ``eps`` is only consistent with the close side.  The
    existence of an efficient unitary realizing the far action is not audited.
    """
    if channel.dim_in != channel.dim_out:
        raise DimensionMismatchError("non-identity check needs equal input and output dims")
    dd = diamond_distance(channel, identity_channel(channel.n_qubits_in), restarts, seed)
    stat = dd.lower_bound
    if stat >= 2.0 - eps:
        side, heuristic = "YES", False
    elif stat <= eps:
        side, heuristic = "NO", True
    else:
        side, heuristic = None, True
    return ProblemVerdict(
        problem=NON_IDENTITY,
        statistic=stat,
        eps=eps,
        yes_bound=2.0 - eps,
        no_bound=eps,
        consistent_with=side,
        heuristic_only=heuristic,
        witness=dd.witness,
        seed=seed if isinstance(seed, int) else None,
        notes="efficient-unitary existence clause of the far side is not audited",
    )


def _unit_vector(params: np.ndarray, dim: int) -> np.ndarray:
    v = params[:dim] + 1j * params[dim:]
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        v = np.zeros(dim, dtype=np.complex128)
        v[0] = 1.0
        return v
    return v / norm


def nonisometry_stat(
    channel: QuantumChannel, eps: float, restarts: int = 10, seed=0
) -> ProblemVerdict:
    """Minimum over pure doubled-space inputs of the output operator norm.

    Isometry-like channels keep the statistic near one; channels that can
    flatten a pure input drive it toward zero.  Starts include the maximally
    entangled input, whose output norm is analytically small for trace-out
    channels.
    """
    d_in = channel.dim_in
    dim = d_in * d_in

    def objective(params: np.ndarray) -> float:
        psi = _unit_vector(params, dim)
        rho = np.outer(psi, psi.conj())
        out = apply_choi_to_segment(channel.choi, d_in, channel.dim_out, rho, 1, d_in)
        return operator_norm(out)

    starts = [np.eye(d_in, dtype=np.complex128).reshape(-1) / math.sqrt(d_in)]
    for s, ss in enumerate(np.random.SeedSequence(_seed_int(seed)).spawn(restarts)):
        starts.append(random_pure_state(dim, ss).amplitudes)
    best_val, best_psi = math.inf, starts[0]
    for start in starts:
        x0 = np.concatenate([start.real, start.imag])
        direct = objective(x0)
        if direct < best_val:
            best_val, best_psi = direct, _unit_vector(x0, dim)
        res = optimize.minimize(
            objective, x0, method="Nelder-Mead", options={"maxiter": 800, "xatol": 1e-7, "fatol": 1e-10}
        )
        if res.fun < best_val:
            best_val, best_psi = float(res.fun), _unit_vector(res.x, dim)
    if best_val <= eps:
        side = "YES"
    elif best_val >= 1.0 - eps:
        side = "NO"
    else:
        side = None
    return ProblemVerdict(
        problem=NON_ISOMETRY,
        statistic=best_val,
        eps=eps,
        yes_bound=eps,
        no_bound=1.0 - eps,
        consistent_with=side,
        heuristic_only=side != "YES",
        witness=PureState(best_psi),
        seed=seed if isinstance(seed, int) else None,
    )


def _top_eigvec_with_tiebreak(mat: np.ndarray, previous: np.ndarray) -> np.ndarray:
    """Top eigenvector; inside a degenerate top eigenspace, stay close to the previous iterate."""
    vals, vecs = np.linalg.eigh(mat)
    top = vals[-1]
    members = vecs[:, vals >= top - 1e-12]
    proj = members @ (members.conj().T @ previous)
    norm = np.linalg.norm(proj)
    if norm > 1e-9:
        return proj / norm
    return members[:, 0]


def pure_fixed_point_search(
    channel: QuantumChannel, eps: float, restarts: int = 10, iters: int = 50, seed=0
) -> ProblemVerdict:
    """Search for a pure state the channel leaves (nearly) unchanged.

    Iterates toward the top eigenvector of the channel output, keeps the
    smallest trace distance seen across restarts and iterations, and polishes
    the best candidate with a derivative-free local descent.
    """
    if channel.dim_in != channel.dim_out:
        raise DimensionMismatchError("fixed-point search needs equal input and output dims")
    if restarts < 1:
        raise ValueError("need at least one restart")
    d = channel.dim_in
    best_val, best_psi = math.inf, None
    rng_streams = np.random.SeedSequence(_seed_int(seed)).spawn(restarts)
    for ss in rng_streams:
        psi = random_pure_state(d, ss).amplitudes
        for _ in range(iters):
            rho = np.outer(psi, psi.conj())
            out = channel.apply(rho).matrix
            dist = trace_norm(out - rho)
            if dist < best_val:
                best_val, best_psi = dist, psi
            if dist < 1e-12:
                break
            nxt = _top_eigvec_with_tiebreak(out, psi)
            if abs(np.vdot(nxt, psi)) > 1.0 - 1e-14:
                psi = nxt
                break
            psi = nxt
        rho = np.outer(psi, psi.conj())
        dist = trace_norm(channel.apply(rho).matrix - rho)
        if dist < best_val:
            best_val, best_psi = dist, psi

    def objective(params: np.ndarray) -> float:
        vec = _unit_vector(params, d)
        rho = np.outer(vec, vec.conj())
        return trace_norm(channel.apply(rho).matrix - rho)

    if best_val > 1e-12:
        x0 = np.concatenate([best_psi.real, best_psi.imag])
        res = optimize.minimize(
            objective, x0, method="Nelder-Mead", options={"maxiter": 600, "fatol": 1e-11}
        )
        if res.fun < best_val:
            best_val, best_psi = float(res.fun), _unit_vector(res.x, d)
    if best_val <= eps:
        side = "YES"
    elif best_val >= 2.0 - eps:
        side = "NO"
    else:
        side = None
    return ProblemVerdict(
        problem=PURE_FIXED_POINT,
        statistic=best_val,
        eps=eps,
        yes_bound=eps,
        no_bound=2.0 - eps,
        consistent_with=side,
        heuristic_only=side != "YES",
        witness=PureState(best_psi),
        seed=seed if isinstance(seed, int) else None,
    )


def min_output_entropy(
    channel: QuantumChannel, restarts: int = 10, iters: int = 60, seed=0, eps: float = 0.5
) -> ProblemVerdict:
    """Minimum von Neumann entropy (bits) of the channel output over pure inputs.

    Uses the fixed-point iteration toward the top eigenvector of the pulled
    back log-output, tracking the best entropy across restarts.
    """
    d_in, d_out = channel.dim_in, channel.dim_out
    log_dim = math.log2(d_out)

    def entropy_of(psi: np.ndarray) -> float:
        rho = np.outer(psi, psi.conj())
        out = channel.apply(rho).matrix
        return von_neumann_entropy(out)

    def pulled_back_log(psi: np.ndarray) -> np.ndarray:
        rho = np.outer(psi, psi.conj())
        out = channel.apply(rho).matrix
        vals, vecs = np.linalg.eigh(out)
        logs = np.log(np.clip(vals, 1e-18, None))
        log_out = (vecs * logs) @ vecs.conj().T
        pulled = apply_choi_adjoint_to_segment(channel.choi, d_in, d_out, log_out)
        return (pulled + pulled.conj().T) / 2

    starts = [np.eye(d_in, dtype=np.complex128)[:, 0]]
    for ss in np.random.SeedSequence(_seed_int(seed)).spawn(restarts):
        starts.append(random_pure_state(d_in, ss).amplitudes)
    best_val, best_psi = math.inf, starts[0]
    for psi in starts:
        for _ in range(iters):
            s = entropy_of(psi)
            if s < best_val:
                best_val, best_psi = s, psi
            if s < 1e-12:
                break
            nxt = _top_eigvec_with_tiebreak(pulled_back_log(psi), psi)
            if abs(np.vdot(nxt, psi)) > 1.0 - 1e-14:
                break
            psi = nxt
        s = entropy_of(psi)
        if s < best_val:
            best_val, best_psi = s, psi
    best_val = max(best_val, 0.0)
    yes_bound = eps * log_dim
    no_bound = (1.0 - eps) * log_dim
    if best_val <= yes_bound:
        side = "YES"
    elif best_val >= no_bound:
        side = "NO"
    else:
        side = None
    return ProblemVerdict(
        problem=MIN_OUTPUT_ENTROPY,
        statistic=best_val,
        eps=eps,
        yes_bound=yes_bound,
        no_bound=no_bound,
        consistent_with=side,
        heuristic_only=side != "YES",
        witness=PureState(best_psi),
        seed=seed if isinstance(seed, int) else None,
    )


def bloch_grid_min_entropy(channel: QuantumChannel, resolution: int = 32) -> float:
    """Brute-force entropy minimum for one-qubit channels over a Bloch-sphere grid."""
    if channel.dim_in != 2:
        raise DimensionMismatchError("the Bloch grid oracle is for one-qubit inputs")
    best = math.inf
    for i in range(resolution):
        theta = math.pi * (i + 0.5) / resolution
        for j in range(resolution):
            phi = 2.0 * math.pi * j / resolution
            psi = np.array(
                [math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)],
                dtype=np.complex128,
            )
            out = channel.apply(np.outer(psi, psi.conj())).matrix
            best = min(best, von_neumann_entropy(out))
    return best


def measure_then_flip_circuit() -> MixedStateCircuit:
    """One-qubit channel that dephases in the computational basis, then applies X."""
    ops = (
        GateOp.ancillas(1),
        GateOp.cnot(0, 1),
        GateOp.x(0),
        GateOp.trace_out(1),
    )
    return MixedStateCircuit(1, ops, 1)


def _seed_int(seed) -> int:
    if isinstance(seed, int):
        return seed
    if isinstance(seed, tuple):
        return hash(seed) & 0xFFFFFFFF
    return 0
