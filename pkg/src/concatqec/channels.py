"""One-qubit (and dense multi-qubit) channel representations and conversions.

Four interchangeable forms of a CPTP map are used:

* ``kraus``   -- list of d x d complex matrices ``E_m`` with sum E^dag E = I;
* ``natural`` -- the d^2 x d^2 matrix ``lam = sum_m E_m (x) conj(E_m)`` acting
  on row-major vectorized operators;
* ``choi``    -- the d^2 x d^2 matrix ``chi = sum_m vec(E_m) vec(E_m)^dag``
  (trace d, PSD iff the map is completely positive);
* ``ptm``     -- one-qubit only: the real 4 x 4 process matrix
  ``eta[mu, nu] = Tr[sigma_mu^dag eps(sigma_nu)]`` in the normalized Pauli
  basis, with row 0 equal to (1, 0, 0, 0) for trace-preserving maps.

All conversions are lossless; tolerances for positivity checks follow the
package-wide convention that eigenvalues in [-1e-9, 0) are eigensolver noise
and anything below -1e-9 is a genuine CPTP violation.
"""

from __future__ import annotations

import numpy as np

from .pauli import BASIS_MAT, NORMALIZED_PAULIS

PSD_TOL = 1e-9
KRAUS_EIGVAL_CUTOFF = 1e-9
UNITARITY_TOL = 1e-10


class NotCPTPError(ValueError):
    """Raised when an input violates complete positivity / trace preservation
    beyond tolerance."""


# ---------------------------------------------------------------------------
# vectorization and elementary conversions
# ---------------------------------------------------------------------------

def vectorize(a: np.ndarray) -> np.ndarray:
    """Row-major vectorization: component i*d + j equals a[i, j]."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a.reshape(-1)


def unvectorize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    d = int(round(np.sqrt(v.shape[0])))
    if d * d != v.shape[0]:
        raise ValueError(f"vector length {v.shape[0]} is not a perfect square")
    return v.reshape(d, d)


def _kraus_dim(kraus) -> int:
    if not kraus:
        raise ValueError("empty Kraus set")
    d = kraus[0].shape[0]
    for e in kraus:
        if e.shape != (d, d):
            raise ValueError("mismatched Kraus operator dimensions")
    return d


def check_kraus(kraus, tol: float = 1e-10) -> None:
    """Verify the completeness relation sum_m E_m^dag E_m = I (Frobenius)."""
    d = _kraus_dim(kraus)
    acc = sum(np.conj(e).T @ e for e in kraus)
    dev = np.linalg.norm(acc - np.eye(d))
    if dev > tol:
        raise NotCPTPError(f"Kraus completeness violated: |sum E^dag E - I| = {dev:.3e}")


def kraus_to_natural(kraus) -> np.ndarray:
    d = _kraus_dim(kraus)
    lam = np.zeros((d * d, d * d), dtype=complex)
    for e in kraus:
        lam += np.kron(e, np.conj(e))
    return lam


def kraus_to_choi(kraus) -> np.ndarray:
    d = _kraus_dim(kraus)
    chi = np.zeros((d * d, d * d), dtype=complex)
    for e in kraus:
        v = vectorize(e)
        chi += np.outer(v, np.conj(v))
    return chi


def reshuffle(m: np.ndarray) -> np.ndarray:
    """Swap Choi and natural forms: chi[ab;cd] = lam[ac;bd].  Involutive."""
    m = np.asarray(m)
    dsq = m.shape[0]
    d = int(round(np.sqrt(dsq)))
    if m.shape != (dsq, dsq) or d * d != dsq:
        raise ValueError(f"expected a d^2 x d^2 matrix, got shape {m.shape}")
    return m.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(dsq, dsq)


def choi_to_kraus(chi: np.ndarray) -> list[np.ndarray]:
    """Spectral decomposition of the Choi matrix back into Kraus operators.

    Eigenvalues below the cutoff are dropped; small negatives inside the PSD
    tolerance are clipped to zero.
    """
    chi = np.asarray(chi)
    vals, vecs = np.linalg.eigh((chi + np.conj(chi).T) / 2)
    if vals.min() < -PSD_TOL:
        raise NotCPTPError(f"Choi matrix has eigenvalue {vals.min():.3e} < -{PSD_TOL}")
    kraus = []
    for lam, v in zip(vals, vecs.T):
        if lam <= KRAUS_EIGVAL_CUTOFF:
            continue
        kraus.append(np.sqrt(lam) * unvectorize(v))
    return kraus


def natural_to_ptm(lam: np.ndarray) -> np.ndarray:
    """eta[mu, nu] = <<sigma_mu| lam |sigma_nu>>; one qubit only."""
    lam = np.asarray(lam)
    if lam.shape != (4, 4):
        raise ValueError(f"PTM form is defined for one qubit (4x4), got {lam.shape}")
    return np.real(BASIS_MAT @ lam @ np.conj(BASIS_MAT).T)


def ptm_to_natural(eta: np.ndarray) -> np.ndarray:
    eta = np.asarray(eta)
    if eta.shape != (4, 4):
        raise ValueError(f"PTM must be 4x4, got {eta.shape}")
    return np.conj(BASIS_MAT).T @ eta @ BASIS_MAT


def kraus_to_ptm(kraus) -> np.ndarray:
    return natural_to_ptm(kraus_to_natural(kraus))


def channel_fidelity(eta: np.ndarray) -> float:
    """Channel fidelity F = Tr[eta] / 4 of a one-qubit PTM."""
    eta = np.asarray(eta)
    if eta.shape != (4, 4):
        raise ValueError(f"PTM must be 4x4, got {eta.shape}")
    return float(np.trace(eta).real) / 4.0


def convex_combine(weights, ptms) -> np.ndarray:
    """Entrywise affine combination of PTMs with nonnegative weights summing to 1."""
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(ptms):
        raise ValueError("weights and ptms must have equal length")
    if np.any(weights < 0):
        raise ValueError(f"negative weight in {weights}")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights sum to {weights.sum()}, expected 1")
    out = np.zeros((4, 4))
    for w, eta in zip(weights, ptms):
        out = out + w * np.asarray(eta)
    return out


# ---------------------------------------------------------------------------
# CPTP checks
# ---------------------------------------------------------------------------

def ptm_cptp_deviation(eta: np.ndarray) -> float:
    """Most negative eigenvalue of the reshuffled Choi matrix (0 if PSD).

    The Choi matrix of a one-qubit PTM is reconstructed through the exact
    basis change PTM -> natural -> reshuffle.
    """
    chi = reshuffle(ptm_to_natural(eta))
    vals = np.linalg.eigvalsh((chi + np.conj(chi).T) / 2)
    return float(min(vals.min(), 0.0))


def check_ptm(eta: np.ndarray, require_cptp: bool = True) -> None:
    """Validate PTM invariants: trace-preservation row, entry range, positivity."""
    eta = np.asarray(eta)
    if eta.shape != (4, 4):
        raise ValueError(f"PTM must be 4x4, got {eta.shape}")
    if np.abs(eta[0] - np.array([1.0, 0, 0, 0])).max() > 1e-9:
        raise NotCPTPError(f"PTM row 0 is {eta[0]}, expected (1, 0, 0, 0)")
    if require_cptp:
        if np.abs(eta).max() > 1.0 + 1e-9:
            raise NotCPTPError(f"PTM entry out of [-1, 1]: max |eta| = {np.abs(eta).max()}")
        neg = ptm_cptp_deviation(eta)
        if neg < -PSD_TOL:
            raise NotCPTPError(f"reshuffled Choi eigenvalue {neg:.3e} < -{PSD_TOL}")


def check_choi(chi: np.ndarray, tol: float = 1e-10) -> None:
    """Hermiticity, positivity and Tr chi = d for a Choi matrix."""
    chi = np.asarray(chi)
    dsq = chi.shape[0]
    d = int(round(np.sqrt(dsq)))
    if chi.shape != (dsq, dsq) or d * d != dsq:
        raise ValueError(f"Choi matrix must be d^2 x d^2, got {chi.shape}")
    herm = np.abs(chi - np.conj(chi).T).max()
    if herm > tol:
        raise NotCPTPError(f"Choi matrix not Hermitian: deviation {herm:.3e}")
    vals = np.linalg.eigvalsh((chi + np.conj(chi).T) / 2)
    if vals.min() < -PSD_TOL:
        raise NotCPTPError(f"Choi eigenvalue {vals.min():.3e} < -{PSD_TOL}")
    if abs(np.trace(chi).real - d) > 1e-9:
        raise NotCPTPError(f"Tr chi = {np.trace(chi).real}, expected {d}")


# ---------------------------------------------------------------------------
# dense multi-qubit evolution primitives
# ---------------------------------------------------------------------------

def _n_qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def apply_unitary(op: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Conjugation op -> U op U^dag."""
    op = np.asarray(op)
    u = np.asarray(u)
    if op.shape != u.shape or op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"dimension mismatch: op {op.shape}, U {u.shape}")
    dev = np.abs(np.conj(u).T @ u - np.eye(u.shape[0])).max()
    if dev > UNITARITY_TOL:
        raise ValueError(f"matrix is not unitary: |U^dag U - I| = {dev:.3e}")
    return u @ op @ np.conj(u).T


def apply_channel_to_qubit(op: np.ndarray, qubit: int, lam: np.ndarray) -> np.ndarray:
    """Apply a one-qubit channel (natural form) to one tensor factor of op.

    Qubit 0 is the leftmost factor.  Linear in op and never renormalizing, so
    traceless operators evolve correctly.
    """
    op = np.asarray(op)
    n = _n_qubits(op.shape[0])
    if op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got {op.shape}")
    if not 0 <= qubit < n:
        raise IndexError(f"qubit index {qubit} out of range for {n} qubits")
    lam = np.asarray(lam)
    if lam.shape != (4, 4):
        raise ValueError(f"one-qubit natural superoperator must be 4x4, got {lam.shape}")
    left = 2**qubit
    right = 2 ** (n - qubit - 1)
    t = op.reshape(left, 2, right, left, 2, right)
    # lam4[i, j, k, l] maps input (row k, col l) to output (row i, col j)
    lam4 = lam.reshape(2, 2, 2, 2)
    out = np.einsum("ijkl,akbAlB->aibAjB", lam4, t)
    return out.reshape(op.shape)


def partial_trace_keep_last(op: np.ndarray) -> np.ndarray:
    """Trace out every tensor factor except the last (the data qubit)."""
    op = np.asarray(op)
    n = _n_qubits(op.shape[0])
    if op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got {op.shape}")
    half = 2 ** (n - 1)
    t = op.reshape(half, 2, half, 2)
    return np.einsum("aiaj->ij", t)


def natural_superop_kron(lams) -> np.ndarray:
    """Natural superoperator of a tensor-product channel, in flat row-major vec.

    ``kron`` of the per-qubit superoperators acts on interleaved
    (row_i, col_i) index pairs; this reorders it to act on vec(op) with all
    row indices before all column indices.
    """
    lams = [np.asarray(l) for l in lams]
    n = len(lams)
    k = lams[0]
    for l in lams[1:]:
        k = np.kron(k, l)
    t = k.reshape((2, 2) * (2 * n))
    # axes: output (r1 c1 ... rn cn), input (r1 c1 ... rn cn)
    de_interleave = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    perm = de_interleave + [2 * n + ax for ax in de_interleave]
    dsq = 4**n
    return t.transpose(perm).reshape(dsq, dsq)


def unitary_superop(u: np.ndarray) -> np.ndarray:
    """Natural superoperator of conjugation by U: vec(U rho U^dag) = (U (x) U*) vec(rho)."""
    u = np.asarray(u)
    return np.kron(u, np.conj(u))


# ---------------------------------------------------------------------------
# JSON serialization (CLI import/export format)
# ---------------------------------------------------------------------------

_COMPLEX_FORMS = {"choi", "kraus", "natural", "unitary"}


def _complex_to_pairs(m: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _pairs_to_complex(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data])


def channel_to_json(form: str, data) -> dict:
    """Serialize a channel as {"form", "dim", "data"}; PTMs store plain reals,
    complex forms store [re, im] pairs."""
    if form == "ptm":
        eta = np.asarray(data)
        return {"form": "ptm", "dim": 2, "data": [[float(x) for x in row] for row in eta]}
    if form == "kraus":
        d = _kraus_dim(list(data))
        return {"form": "kraus", "dim": d, "data": [_complex_to_pairs(e) for e in data]}
    if form in ("natural", "choi"):
        m = np.asarray(data)
        d = int(round(np.sqrt(m.shape[0])))
        return {"form": form, "dim": d, "data": _complex_to_pairs(m)}
    if form == "unitary":
        m = np.asarray(data)
        return {"form": "unitary", "dim": m.shape[0], "data": _complex_to_pairs(m)}
    raise ValueError(f"unknown channel form {form!r}")


def channel_from_json(obj: dict):
    """Inverse of :func:`channel_to_json`; returns (form, payload)."""
    form = obj.get("form")
    if form == "ptm":
        return "ptm", np.array(obj["data"], dtype=float)
    if form == "kraus":
        return "kraus", [_pairs_to_complex(e) for e in obj["data"]]
    if form in _COMPLEX_FORMS:
        return form, _pairs_to_complex(obj["data"])
    raise ValueError(f"unknown channel form {form!r}")


def json_to_natural(obj: dict) -> np.ndarray:
    """Load any serialized one-qubit channel and convert it to natural form."""
    form, payload = channel_from_json(obj)
    if form == "ptm":
        return ptm_to_natural(payload)
    if form == "kraus":
        return kraus_to_natural(payload)
    if form == "natural":
        return payload
    if form == "choi":
        return reshuffle(payload)
    raise ValueError(f"form {form!r} is not a channel")
