"""Dense complex linear algebra for small spin/fermion systems.

Qubit 1 is the leftmost Kronecker factor throughout. All Hamiltonians are
dense complex matrices of dimension 2^q; matrix exponentials go through a
Hermitian eigendecomposition, which is exact at these sizes.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

HERMITICITY_TOL = 1e-10

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Fermionic lowering operator on one mode: |0> empty, |1> occupied.
LOWER = np.array([[0, 1], [0, 0]], dtype=complex)
RAISE = LOWER.conj().T


class NonHermitianError(ValueError):
    pass


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two square matrices."""
    if a.shape[0] != a.shape[1] or b.shape[0] != b.shape[1]:
        raise ValueError("kron expects square matrices")
    return np.kron(a, b)


def kron_all(factors) -> np.ndarray:
    return reduce(np.kron, factors)


def pauli_string(n_qubits: int, placement: dict[int, str]) -> np.ndarray:
    """Pauli operator acting on the given qubits (1-indexed), identity elsewhere."""
    for q in placement:
        if not 1 <= q <= n_qubits:
            raise ValueError(f"qubit {q} outside 1..{n_qubits}")
    return kron_all([PAULI[placement.get(q, "i")] for q in range(1, n_qubits + 1)])


def jordan_wigner_ladder(mode_index: int, n_modes: int, kind: str) -> np.ndarray:
    """Fermionic ladder operator on a chain of qubit-encoded modes.

    Mode `mode_index` (0-based) carries the raising/lowering part; every
    lower-indexed mode carries a Z factor so the canonical anticommutation
    relations hold as exact matrix identities.
    """
    if not 0 <= mode_index < n_modes:
        raise ValueError(f"mode {mode_index} outside 0..{n_modes - 1}")
    if kind not in ("create", "annihilate"):
        raise ValueError(f"unknown ladder kind {kind!r}")
    local = RAISE if kind == "create" else LOWER
    factors = [PAULI["z"]] * mode_index + [local] + [PAULI["i"]] * (n_modes - mode_index - 1)
    return kron_all(factors)


def number_operator(mode_index: int, n_modes: int) -> np.ndarray:
    c_dag = jordan_wigner_ladder(mode_index, n_modes, "create")
    c = jordan_wigner_ladder(mode_index, n_modes, "annihilate")
    return c_dag @ c


def is_hermitian(h: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return bool(np.max(np.abs(h - h.conj().T)) <= tol)


def expm_unitary(h: np.ndarray, t: float) -> np.ndarray:
    """e^{-i h t} for Hermitian h, via eigendecomposition."""
    if not is_hermitian(h):
        raise NonHermitianError("matrix is not Hermitian within tolerance")
    evals, evecs = np.linalg.eigh(h)
    phases = np.exp(-1j * evals * t)
    return (evecs * phases) @ evecs.conj().T


def likelihood_p0(h: np.ndarray, t: float, probe: np.ndarray) -> float:
    """Survival probability |<psi| e^{-i h t} |psi>|^2."""
    if h.shape[0] != probe.shape[0]:
        raise ValueError(
            f"dimension mismatch: matrix {h.shape[0]}, probe {probe.shape[0]}"
        )
    amp = probe.conj() @ (expm_unitary(h, t) @ probe)
    return float(np.clip(np.abs(amp) ** 2, 0.0, 1.0))


def embed_matrix(m: np.ndarray, n_qubits_from: int, n_qubits_to: int) -> np.ndarray:
    """Pad an operator with identity factors on trailing qubits."""
    if n_qubits_to < n_qubits_from:
        raise ValueError("cannot embed into fewer qubits")
    if n_qubits_to == n_qubits_from:
        return m
    return np.kron(m, np.eye(2 ** (n_qubits_to - n_qubits_from)))
