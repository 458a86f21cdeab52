"""Shared exception types and the desk-scale capacity policy."""

import os

DEFAULT_MAX_QUBITS = 12
CAP_ENV_VAR = "QCT_MAX_QUBITS"


class QctError(Exception):
    """Base class for errors raised by this package."""


class CapacityError(QctError):
    """A construction would exceed the desk-scale qubit cap."""


class InvalidStateError(QctError):
    """A vector or matrix fails the invariants of its state type."""


class DimensionMismatchError(QctError):
    """Operands have incompatible dimensions."""


class BudgetExceededError(QctError):
    """Exact key enumeration was requested beyond the enumeration budget."""


class WrongSideError(QctError):
    """A certification routine was called on the wrong side of a promise."""


class CircuitError(QctError):
    """An in-memory circuit violates well-formedness."""


class CircuitParseError(QctError):
    """A circuit document failed to parse; the message names the field path."""


class UnsupportedGateError(QctError):
    """An unknown gate kind, or a gate invalid in the current context."""


def max_qubits() -> int:
    """Current qubit cap; QCT_MAX_QUBITS overrides the default of 12."""
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None:
        return DEFAULT_MAX_QUBITS
    try:
        value = int(raw)
    except ValueError as exc:
        raise QctError(f"{CAP_ENV_VAR} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise QctError(f"{CAP_ENV_VAR} must be positive, got {value}")
    return value


def check_capacity(total_qubits: int, context: str) -> None:
    """Raise CapacityError when a construction needs more live qubits than allowed."""
    cap = max_qubits()
    if total_qubits > cap:
        raise CapacityError(
            f"{context} needs {total_qubits} qubits, above the cap of {cap} "
            f"(override with {CAP_ENV_VAR})"
        )
