"""Exact effective one-qubit channel of one error-correction round, and the
deterministic average-channel recursion across concatenation levels.

One round maps n one-qubit input channels to a single output PTM:

    eta_eff[mu, nu] = Tr[ sigma_mu^dag Tr_A[ U^dag L(U (|a0><a0| (x) sigma_nu) U^dag) U ] ]

with L the tensor product of the per-qubit channels and |a0> the ancilla
ground state.  Two independent implementations are provided (the dense
operator path and, for n = 5, a full superoperator oracle), plus a fast
precomputed-tensor kernel used by the Monte Carlo driver: the map is
multilinear in the per-qubit PTMs, so it is a contraction of a fixed pair of
code tensors with the n input matrices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channels import (
    apply_channel_to_qubit,
    channel_fidelity,
    check_ptm,
    natural_superop_kron,
    partial_trace_keep_last,
    ptm_to_natural,
    reshuffle,
    unitary_superop,
)
from .codes import CodeSpec
from .pauli import BASIS_MAT, NORMALIZED_PAULIS, pauli_coefficients

CPTP_WARN_TOL = 1e-9


def _check_layer(code: CodeSpec, layer, warn_non_cptp: bool) -> list[np.ndarray]:
    if len(layer) != code.n:
        raise ValueError(f"layer has {len(layer)} channels, code {code.name} needs {code.n}")
    lams = []
    for i, lam in enumerate(layer):
        lam = np.asarray(lam)
        if lam.shape != (4, 4):
            raise ValueError(f"channel {i}: expected 4x4 natural form, got {lam.shape}")
        if warn_non_cptp:
            vals = np.linalg.eigvalsh((reshuffle(lam) + np.conj(reshuffle(lam)).T) / 2)
            if vals.min() < -CPTP_WARN_TOL:
                warnings.warn(
                    f"channel {i} is not CPTP (Choi eigenvalue {vals.min():.3e}); "
                    "evolving it anyway (only linearity is required)",
                    stacklevel=3,
                )
        lams.append(lam)
    return lams


def _embed_data_pauli(nu: int, n: int) -> np.ndarray:
    """|a0><a0| (x) sigma_nu as a dense 2^n operator (ancillas first)."""
    op = np.zeros((2**n, 2**n), dtype=complex)
    op[0:2, 0:2] = NORMALIZED_PAULIS[nu]
    return op


def effective_ptm(code: CodeSpec, layer, *, warn_non_cptp: bool = True) -> np.ndarray:
    """One QEC round on the dense 2^n operator path (16 basis evolutions).

    `layer` holds one natural-form 4x4 superoperator per physical qubit.
    """
    lams = _check_layer(code, layer, warn_non_cptp)
    u = code.encoding_unitary
    ud = np.conj(u).T
    eta = np.empty((4, 4))
    for nu in range(4):
        op = _embed_data_pauli(nu, code.n)
        op = u @ op @ ud  # encoding; U certified unitary at construction
        for qubit, lam in enumerate(lams):
            op = apply_channel_to_qubit(op, qubit, lam)
        op = ud @ op @ u  # decoding / correction
        out = partial_trace_keep_last(op)
        for mu in range(4):
            eta[mu, nu] = np.real(np.trace(np.conj(NORMALIZED_PAULIS[mu]).T @ out))
    return eta


def effective_ptm_dense_oracle(code: CodeSpec, layer, *, warn_non_cptp: bool = True) -> np.ndarray:
    """Independent verification path for n = 5: full 1024x1024 superoperators.

    Builds the tensor-product channel as one Kronecker superoperator,
    sandwiches it between the encoding superoperators, applies the
    partial-trace superoperator and projects onto the Pauli basis.
    """
    if code.n != 5:
        raise ValueError(f"dense oracle supports n = 5 only, got n = {code.n}")
    lams = _check_layer(code, layer, warn_non_cptp)
    dim = 2**code.n
    lam_full = natural_superop_kron(lams)
    usup = unitary_superop(code.encoding_unitary)
    udsup = np.conj(usup).T  # superoperator of conjugation by U^dag

    # embed matrix: column nu is vec(|a0><a0| (x) sigma_nu)
    embed = np.stack([_embed_data_pauli(nu, code.n).reshape(-1) for nu in range(4)], axis=1)
    # partial-trace superoperator: vec(op) -> vec(Tr_A op)
    ptr = np.zeros((4, dim * dim))
    for a in range(dim // 2):
        for r in range(2):
            for c in range(2):
                ptr[2 * r + c, (a * 2 + r) * dim + (a * 2 + c)] = 1.0
    out = ptr @ (udsup @ (lam_full @ (usup @ embed)))
    return np.real(BASIS_MAT @ out)


# ---------------------------------------------------------------------------
# precomputed-tensor kernel (hot path)
# ---------------------------------------------------------------------------

class CodeKernel:
    """Fast evaluator of the effective-channel map for one code.

    The round is multilinear in the per-qubit PTMs: expanding the encoded
    basis operators in the n-qubit Pauli basis once yields two fixed real
    tensors (both extremely sparse), and each evaluation reduces to a
    gather-multiply contraction with the n input PTMs.  Agrees with
    :func:`effective_ptm` to machine precision.
    """

    def __init__(self, code: CodeSpec):
        self.code = code
        self.n = code.n
        u = code.encoding_unitary
        ud = np.conj(u).T
        dim = 2**code.n
        n4 = 4**code.n
        vmat = np.empty((n4, 4))  # encoded inputs in the Pauli-string basis
        gmat = np.empty((4, n4))  # decoded projectors in the Pauli-string basis
        for mu in range(4):
            enc = u @ _embed_data_pauli(mu, code.n) @ ud
            vmat[:, mu] = np.real(pauli_coefficients(enc, code.n)).reshape(-1)
            proj = u @ np.kron(np.eye(dim // 2), NORMALIZED_PAULIS[mu]) @ ud
            gmat[mu, :] = np.real(pauli_coefficients(proj, code.n)).reshape(-1)

        def digits(flat: np.ndarray) -> np.ndarray:
            out = np.empty((flat.shape[0], code.n), dtype=np.intp)
            rem = flat.copy()
            for i in range(code.n - 1, -1, -1):
                out[:, i] = rem % 4
                rem //= 4
            return out

        va, vnu = np.nonzero(np.abs(vmat) > 1e-14)
        gmu, gb = np.nonzero(np.abs(gmat) > 1e-14)
        self._v_digits = digits(va)                      # (Pv, n) input-side letters
        self._g_digits = digits(gb)                      # (Pg, n) output-side letters
        # scatter weights folded into (4, P) matrices so the final reduction
        # is two small matmuls instead of an indexed accumulation
        self._wg = np.zeros((4, gmu.shape[0]))
        self._wg[gmu, np.arange(gmu.shape[0])] = gmat[gmu, gb]
        self._wv = np.zeros((va.shape[0], 4))
        self._wv[np.arange(va.shape[0]), vnu] = vmat[va, vnu]

    def evaluate(self, ptms) -> np.ndarray:
        """Effective PTM of one round with the given per-qubit PTMs."""
        if len(ptms) != self.n:
            raise ValueError(f"expected {self.n} PTMs, got {len(ptms)}")
        prod = np.ones((self._g_digits.shape[0], self._v_digits.shape[0]))
        for i in range(self.n):
            prod *= ptms[i][self._g_digits[:, i, None], self._v_digits[None, :, i]]
        return (self._wg @ prod) @ self._wv

    def evaluate_blocks(self, channels: np.ndarray) -> np.ndarray:
        """Map consecutive blocks of n PTMs (shape (m*n, 4, 4)) through one round."""
        total = channels.shape[0]
        if total % self.n:
            raise ValueError(f"{total} channels do not split into blocks of {self.n}")
        m = total // self.n
        out = np.empty((m, 4, 4))
        for b in range(m):
            out[b] = self.evaluate(channels[b * self.n : (b + 1) * self.n])
        return out


_KERNELS: dict[int, tuple[CodeSpec, CodeKernel]] = {}


def get_kernel(code: CodeSpec) -> CodeKernel:
    """Per-code kernel cache (keyed by object identity; codes are immutable)."""
    hit = _KERNELS.get(id(code))
    if hit is not None and hit[0] is code:
        return hit[1]
    kernel = CodeKernel(code)
    _KERNELS[id(code)] = (code, kernel)
    return kernel


# ---------------------------------------------------------------------------
# deterministic average recursion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AverageRecursion:
    """Strict per-level average PTMs and fidelities, l = 0..levels."""

    ptms: tuple[np.ndarray, ...]
    fidelities: tuple[float, ...]


def average_recursion(code: CodeSpec, avg0: np.ndarray, levels: int) -> AverageRecursion:
    """Iterate the round on n identical copies of the previous level's average.

    Valid because the average effective channel depends only on the average
    input channel (the round is multilinear and the per-qubit inputs are
    independent and identically distributed).
    """
    avg0 = np.asarray(avg0, dtype=float)
    check_ptm(avg0)
    kernel = get_kernel(code)
    ptms = [avg0]
    for _ in range(levels):
        ptms.append(kernel.evaluate([ptms[-1]] * code.n))
    return AverageRecursion(
        ptms=tuple(ptms), fidelities=tuple(channel_fidelity(p) for p in ptms)
    )


def layer_from_ptms(ptms) -> list[np.ndarray]:
    """Convert per-qubit PTMs to the natural-form layer `effective_ptm` takes."""
    return [ptm_to_natural(p) for p in ptms]
