"""Pauli-basis constants and multi-qubit Pauli utilities.

Conventions used throughout the package:

* operators are row-major vectorized: ``vec(A)[i*d + j] = A[i, j]``;
* the one-qubit operator basis is the normalized Pauli set
  ``sigma_mu = {I, X, Y, Z} / sqrt(2)`` (orthonormal under the
  Hilbert-Schmidt inner product ``Tr[A^dag B]``);
* qubit 0 is the leftmost tensor factor (most significant bit).
"""

from __future__ import annotations

import numpy as np

SQRT2 = np.sqrt(2.0)

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
PAULI_LETTERS = "IXYZ"

#: normalized one-qubit basis sigma_mu = pauli_mu / sqrt(2)
NORMALIZED_PAULIS = tuple(p / SQRT2 for p in PAULIS)

#: change of basis from row-major vec to the normalized Pauli basis:
#: BASIS_MAT[mu, :] = conj(vec(sigma_mu)), so coeffs = BASIS_MAT @ vec(A).
BASIS_MAT = np.array([np.conj(p).reshape(-1) for p in NORMALIZED_PAULIS])


def pauli_letter_indices(letters: str) -> tuple[int, ...]:
    """Map a string like ``'IXZY'`` to per-qubit indices ``(0, 1, 3, 2)``."""
    try:
        return tuple(PAULI_LETTERS.index(c) for c in letters)
    except ValueError:
        raise ValueError(f"invalid Pauli letter in {letters!r}") from None


def pauli_matrix(indices) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the Pauli string with the given per-qubit indices."""
    m = np.array([[1.0 + 0.0j]])
    for idx in indices:
        m = np.kron(m, PAULIS[idx])
    return m


def pauli_apply(indices, vec: np.ndarray) -> np.ndarray:
    """Apply a Pauli string to a state vector without building the matrix.

    X/Y flip the corresponding bit; Z/Y contribute a sign on set bits; every Y
    contributes an extra factor i (on the post-flip bit value: Y|0> = i|1>,
    Y|1> = -i|0>).
    """
    n = len(indices)
    dim = vec.shape[0]
    if dim != 2**n:
        raise ValueError(f"state length {dim} does not match {n} qubits")
    flip = 0
    for q, idx in enumerate(indices):
        if idx in (1, 2):
            flip |= 1 << (n - 1 - q)
    src = np.arange(dim) ^ flip  # out[i] gets phase(src[i]) * vec[src[i]]
    phase = np.ones(dim, dtype=complex)
    for q, idx in enumerate(indices):
        bit = (np.arange(dim) >> (n - 1 - q)) & 1
        if idx == 3:  # Z picks up -1 on |1>
            phase = np.where(bit ^ ((flip >> (n - 1 - q)) & 1), -phase, phase)
        elif idx == 2:  # Y = i on |1><0| , -i on |0><1|
            src_bit = bit ^ 1
            phase = phase * np.where(src_bit, -1.0j, 1.0j)
    return phase * vec[src]


def pauli_coefficients(op: np.ndarray, n_qubits: int) -> np.ndarray:
    """Expand a 2^n x 2^n operator in the normalized Pauli-string basis.

    Returns the full tensor of 4^n coefficients ``Tr[Q_a^dag op]`` with shape
    ``(4,) * n``, where ``Q_a`` is the tensor product of normalized Paulis with
    per-qubit indices ``a``.  Runs in O(n 4^n) by transforming one qubit at a
    time.
    """
    dim = 2**n_qubits
    if op.shape != (dim, dim):
        raise ValueError(f"operator shape {op.shape} does not match {n_qubits} qubits")
    t = op.reshape((2,) * (2 * n_qubits))
    # interleave (row_i, col_i) pairs, then fuse each pair into one axis of 4
    perm = [None] * (2 * n_qubits)
    perm[0::2] = range(n_qubits)
    perm[1::2] = range(n_qubits, 2 * n_qubits)
    t = np.transpose(t, perm).reshape((4,) * n_qubits)
    for i in range(n_qubits):
        t = np.moveaxis(np.tensordot(BASIS_MAT, t, axes=([1], [i])), 0, i)
    return t


def pauli_reconstruct(coeffs: np.ndarray, n_qubits: int) -> np.ndarray:
    """Inverse of :func:`pauli_coefficients`."""
    t = np.asarray(coeffs, dtype=complex).reshape((4,) * n_qubits)
    inv = np.conj(BASIS_MAT).T  # unitary basis change
    for i in range(n_qubits):
        t = np.moveaxis(np.tensordot(inv, t, axes=([1], [i])), 0, i)
    t = t.reshape((2, 2) * n_qubits)
    perm = list(range(0, 2 * n_qubits, 2)) + list(range(1, 2 * n_qubits, 2))
    dim = 2**n_qubits
    return np.transpose(t, perm).reshape(dim, dim)
