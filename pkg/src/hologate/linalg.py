"""Dense complex linear algebra kernel: Pauli strings, Hermitian
eigendecomposition, unitary exponentials and fidelity metrics.

Everything here is a pure function of its arguments; dimensions are small
(up to three qubits), so dense numpy throughout.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

HERMITICITY_RTOL = 1e-12


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

PAULI_AXES = "IXYZ"


def kron(*ops: np.ndarray) -> np.ndarray:
    """Tensor product of one or more matrices, left factor most significant."""
    if not ops:
        raise ValidationError("kron needs at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def pauli_string(labels: str | Sequence[str]) -> np.ndarray:
    """Materialize a Pauli string such as "XY" or ["X", "Y"] as a matrix."""
    labels = list(labels)
    if not labels:
        raise ValidationError("empty Pauli string")
    try:
        return kron(*(PAULI_1Q[a] for a in labels))
    except KeyError as exc:
        raise ValidationError(f"unknown Pauli label {exc.args[0]!r}") from None


def pauli_on(n: int, qubit: int, label: str) -> np.ndarray:
    """Single-qubit Pauli acting on one wire of an n-qubit register."""
    if not 0 <= qubit < n:
        raise ValidationError(f"qubit {qubit} out of range for n={n}")
    labels = ["I"] * n
    labels[qubit] = label
    return pauli_string(labels)


def pauli_labels(n: int) -> list[str]:
    """All length-n Pauli labels in lexicographic (I, X, Y, Z) order."""
    labels = [""]
    for _ in range(n):
        labels = [s + a for s in labels for a in PAULI_AXES]
    return labels


def pauli_basis(n: int) -> tuple[list[str], np.ndarray]:
    """Labels and a stacked (4^n, 2^n, 2^n) array of all n-qubit Paulis."""
    labels = pauli_labels(n)
    return labels, np.stack([pauli_string(s) for s in labels])


def is_hermitian(a: np.ndarray, rtol: float = HERMITICITY_RTOL) -> bool:
    a = np.asarray(a)
    scale = np.linalg.norm(a)
    return np.linalg.norm(a - a.conj().T) <= rtol * max(scale, 1e-300) or scale == 0.0


def require_hermitian(a: np.ndarray, rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not is_hermitian(a, rtol):
        raise ValidationError("matrix is not Hermitian within tolerance")
    return a


def herm_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns eigenvalues sorted ascending and the matching orthonormal
    eigenvectors as columns. Degenerate subspaces come back as an arbitrary
    orthonormal basis; callers needing continuity must gauge-fix downstream.
    """
    a = require_hermitian(a)
    vals, vecs = np.linalg.eigh(a)
    return vals, vecs


def unitary_exp(a: np.ndarray, s: float) -> np.ndarray:
    """exp(-i*s*A) for Hermitian A, via eigendecomposition."""
    vals, vecs = herm_eig(a)
    return (vecs * np.exp(-1j * s * vals)) @ vecs.conj().T


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    d = u.shape[0]
    return np.linalg.norm(u.conj().T @ u - np.eye(d)) < tol


def unitary_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Global-phase-invariant gate fidelity |tr(U^dag V)| / d.

    Equals 1 exactly when V = e^{i a} U. Symmetric in its arguments.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(abs(np.trace(u.conj().T @ v)) / u.shape[0])


def _cnot() -> np.ndarray:
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = PAULI_1Q["X"]
    return m


#: Named target gates. "CNOT" flips the second qubit conditioned on the first.
GATES = {
    "I": np.eye(2, dtype=complex),
    "X": PAULI_1Q["X"].copy(),
    "Y": PAULI_1Q["Y"].copy(),
    "Z": PAULI_1Q["Z"].copy(),
    "H": (PAULI_1Q["X"] + PAULI_1Q["Z"]) / np.sqrt(2.0),
    "P": np.diag([1.0, 1.0j]).astype(complex),
    "T": np.diag([1.0, np.exp(1.0j * np.pi / 4)]).astype(complex),
    "CNOT": _cnot(),
}


def named_gate(name: str) -> np.ndarray:
    try:
        return GATES[name].copy()
    except KeyError:
        raise ValidationError(
            f"unknown gate {name!r}; known: {sorted(GATES)}"
        ) from None


def product(ops: Iterable[np.ndarray]) -> np.ndarray:
    """Time-ordered product of operators: first element acts first."""
    ops = list(ops)
    if not ops:
        raise ValidationError("product of no operators")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.asarray(op, dtype=complex) @ out
    return out
