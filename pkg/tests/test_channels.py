import numpy as np
import pytest

from concatqec.channels import (
    NotCPTPError,
    apply_channel_to_qubit,
    apply_unitary,
    channel_fidelity,
    channel_from_json,
    channel_to_json,
    check_choi,
    check_kraus,
    check_ptm,
    choi_to_kraus,
    convex_combine,
    json_to_natural,
    kraus_to_choi,
    kraus_to_natural,
    kraus_to_ptm,
    natural_superop_kron,
    natural_to_ptm,
    partial_trace_keep_last,
    ptm_to_natural,
    reshuffle,
    unitary_superop,
    vectorize,
)
from concatqec.noise import AVERAGE_UNITARY_KRAUS, amplitude_damping_kraus, depolarizing_ptm
from concatqec.pauli import PAULI_X, PAULI_Z

from conftest import random_cptp_natural, random_cptp_ptm, random_density

from concatqec.noise import random_cptp_kraus


# ---------------------------------------------------------------------------
# vectorization
# ---------------------------------------------------------------------------

def test_vectorize_identity():
    np.testing.assert_array_equal(vectorize(np.eye(2)), [1, 0, 0, 1])


def test_vectorize_sigma_x():
    np.testing.assert_array_equal(vectorize(PAULI_X), [0, 1, 1, 0])


def test_vectorize_inner_product_is_trace(rng):
    for _ in range(10):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        np.testing.assert_allclose(
            np.vdot(vectorize(a), vectorize(b)), np.trace(np.conj(a).T @ b), atol=1e-13
        )


def test_vectorize_rejects_non_square():
    with pytest.raises(ValueError):
        vectorize(np.zeros((2, 3)))


def test_vectorize_kronecker_identity(rng):
    # |A rho B>> = (A (x) B^T) |rho>>
    a, b, rho = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    lhs = vectorize(a @ rho @ b)
    rhs = np.kron(a, b.T) @ vectorize(rho)
    np.testing.assert_allclose(lhs, rhs, atol=1e-13)


# ---------------------------------------------------------------------------
# kraus -> natural / choi
# ---------------------------------------------------------------------------

def test_natural_of_identity_kraus():
    np.testing.assert_array_equal(kraus_to_natural([np.eye(2)]), np.eye(4))


def test_natural_of_average_unitary_kraus():
    eta = natural_to_ptm(kraus_to_natural(list(AVERAGE_UNITARY_KRAUS)))
    np.testing.assert_allclose(eta, np.diag([1, 1 / 3, 1 / 3, 1 / 3]), atol=1e-14)


def test_natural_matches_direct_kraus_action(rng):
    kraus = random_cptp_kraus(rng)
    lam = kraus_to_natural(kraus)
    for _ in range(10):
        rho = random_density(rng)
        direct = sum(e @ rho @ np.conj(e).T for e in kraus)
        via_superop = (lam @ vectorize(rho)).reshape(2, 2)
        np.testing.assert_allclose(via_superop, direct, atol=1e-12)


def test_kraus_to_natural_rejects_mismatched_dims():
    with pytest.raises(ValueError):
        kraus_to_natural([np.eye(2), np.eye(4)])


def test_choi_of_identity():
    chi = kraus_to_choi([np.eye(2)])
    expected = np.zeros((4, 4))
    for i, j in ((0, 0), (0, 3), (3, 0), (3, 3)):
        expected[i, j] = 1.0
    np.testing.assert_array_equal(chi, expected)


def test_choi_of_amplitude_damping():
    chi = kraus_to_choi(amplitude_damping_kraus(0.98))
    assert abs(np.trace(chi).real - 2.0) < 1e-12
    assert np.linalg.eigvalsh(chi).min() >= -1e-12
    check_choi(chi)


def test_choi_of_unitary_is_rank_one(rng):
    u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    vals = np.linalg.eigvalsh(kraus_to_choi([u]))
    assert np.sum(vals > 1e-10) == 1


# ---------------------------------------------------------------------------
# reshuffle
# ---------------------------------------------------------------------------

def test_reshuffle_identity_channel():
    np.testing.assert_array_equal(reshuffle(np.eye(4)), kraus_to_choi([np.eye(2)]))


def test_reshuffle_is_involution(rng):
    m = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    np.testing.assert_array_equal(reshuffle(reshuffle(m)), m)


def test_reshuffle_links_choi_and_natural(rng):
    kraus = random_cptp_kraus(rng)
    np.testing.assert_allclose(
        kraus_to_natural(kraus), reshuffle(kraus_to_choi(kraus)), atol=1e-13
    )


def test_reshuffle_rejects_bad_dimension():
    with pytest.raises(ValueError):
        reshuffle(np.eye(3))


# ---------------------------------------------------------------------------
# choi -> kraus
# ---------------------------------------------------------------------------

def test_choi_to_kraus_identity():
    (e,) = choi_to_kraus(kraus_to_choi([np.eye(2)]))
    # defined up to a global phase
    phase = e[0, 0] / abs(e[0, 0])
    np.testing.assert_allclose(e / phase, np.eye(2), atol=1e-12)


def test_choi_to_kraus_depolarizing_roundtrip():
    eta = depolarizing_ptm(0.98)
    chi = reshuffle(ptm_to_natural(eta))
    kraus = choi_to_kraus(chi)
    assert len(kraus) == 4
    check_kraus(kraus)
    np.testing.assert_allclose(kraus_to_ptm(kraus), eta, atol=1e-12)


def test_choi_to_kraus_rejects_negative_eigenvalue():
    chi = kraus_to_choi([np.eye(2)])
    chi = chi - 1e-6 * np.outer([0, 1, -1, 0], [0, 1, -1, 0])
    with pytest.raises(NotCPTPError):
        choi_to_kraus(chi)


# ---------------------------------------------------------------------------
# PTM conversions, fidelity, combination
# ---------------------------------------------------------------------------

def test_ptm_of_identity():
    np.testing.assert_allclose(natural_to_ptm(np.eye(4)), np.eye(4), atol=1e-15)


def test_ptm_roundtrip_random(rng):
    for _ in range(100):
        lam = random_cptp_natural(rng)
        np.testing.assert_allclose(
            ptm_to_natural(natural_to_ptm(lam)), lam, atol=1e-13
        )


def test_ptm_rejects_multiqubit():
    with pytest.raises(ValueError):
        natural_to_ptm(np.eye(16))


def test_fidelity_identity():
    assert channel_fidelity(np.eye(4)) == 1.0


def test_fidelity_depolarizing_diag():
    p = 0.9733333333333334
    assert abs(channel_fidelity(np.diag([1.0, p, p, p])) - 0.98) < 1e-12


def test_fidelity_of_mixed_depolarizing_case():
    eta = convex_combine([0.98, 0.02], [depolarizing_ptm(0.98), np.diag([1, 1 / 3, 1 / 3, 1 / 3])])
    assert abs(channel_fidelity(eta) - 0.9704) < 1e-12


def test_convex_combine_single():
    eta = depolarizing_ptm(0.9)
    np.testing.assert_array_equal(convex_combine([1.0], [eta]), eta)


def test_convex_combine_paper_value():
    eta = convex_combine([0.98, 0.02], [depolarizing_ptm(0.98), np.diag([1, 1 / 3, 1 / 3, 1 / 3])])
    assert abs(eta[1, 1] - 0.960533) < 1e-6
    check_ptm(eta)


def test_convex_combine_preserves_cptp(rng):
    eta = convex_combine([0.3, 0.7], [random_cptp_ptm(rng), random_cptp_ptm(rng)])
    check_ptm(eta)  # includes reshuffled-Choi positivity


def test_convex_combine_rejects_bad_weights():
    eta = np.eye(4)
    with pytest.raises(ValueError):
        convex_combine([-0.1, 1.1], [eta, eta])
    with pytest.raises(ValueError):
        convex_combine([0.5, 0.6], [eta, eta])


# ---------------------------------------------------------------------------
# dense evolution primitives
# ---------------------------------------------------------------------------

def test_apply_unitary_identity(rng):
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    np.testing.assert_allclose(apply_unitary(op, np.eye(4)), op)


def test_apply_unitary_bit_flip():
    op = np.diag([1.0, 0.0]).astype(complex)
    np.testing.assert_allclose(apply_unitary(op, PAULI_X), np.diag([0.0, 1.0]))


def test_apply_unitary_preserves_trace(rng):
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    u = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    np.testing.assert_allclose(np.trace(apply_unitary(op, u)), np.trace(op), atol=1e-12)


def test_apply_unitary_rejects_non_unitary():
    with pytest.raises(ValueError):
        apply_unitary(np.eye(2), 2.0 * np.eye(2))


def test_apply_unitary_rejects_dim_mismatch():
    with pytest.raises(ValueError):
        apply_unitary(np.eye(4), np.eye(2))


def test_apply_channel_identity(rng):
    op = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    np.testing.assert_allclose(apply_channel_to_qubit(op, 1, np.eye(4)), op, atol=1e-14)


def test_apply_channel_fully_depolarizing():
    op = np.zeros((4, 4), dtype=complex)
    op[0, 0] = 1.0  # |00><00|
    lam = ptm_to_natural(np.diag([1.0, 0.0, 0.0, 0.0]))
    out = apply_channel_to_qubit(op, 0, lam)
    expected = np.kron(np.eye(2) / 2, np.diag([1.0, 0.0]))
    np.testing.assert_allclose(out, expected, atol=1e-14)


def test_apply_channel_all_qubits_matches_kron_superop(rng):
    # sequential per-qubit application vs the dense 1024x1024 tensor-product
    # superoperator acting on the vectorized operator
    lams = [random_cptp_natural(rng) for _ in range(5)]
    op = rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))
    seq = op
    for q, lam in enumerate(lams):
        seq = apply_channel_to_qubit(seq, q, lam)
    dense = (natural_superop_kron(lams) @ op.reshape(-1)).reshape(32, 32)
    np.testing.assert_allclose(seq, dense, atol=1e-11)


def test_apply_channel_is_linear(rng):
    lam = random_cptp_natural(rng)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    b = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    alpha, beta = 0.3 - 0.2j, 1.1 + 0.4j
    lhs = apply_channel_to_qubit(alpha * a + beta * b, 2, lam)
    rhs = alpha * apply_channel_to_qubit(a, 2, lam) + beta * apply_channel_to_qubit(b, 2, lam)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_apply_channel_index_out_of_range():
    with pytest.raises(IndexError):
        apply_channel_to_qubit(np.eye(8), 3, np.eye(4))


def test_partial_trace_product_state(rng):
    rho = random_density(rng)
    anc = np.zeros((4, 4))
    anc[2, 2] = 1.0
    np.testing.assert_allclose(partial_trace_keep_last(np.kron(anc, rho)), rho, atol=1e-14)


def test_partial_trace_maximally_mixed():
    np.testing.assert_allclose(
        partial_trace_keep_last(np.eye(16) / 16), np.eye(2) / 2, atol=1e-14
    )


def test_partial_trace_preserves_trace(rng):
    op = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    np.testing.assert_allclose(
        np.trace(partial_trace_keep_last(op)), np.trace(op), atol=1e-13
    )


def test_partial_trace_rejects_bad_dim():
    with pytest.raises(ValueError):
        partial_trace_keep_last(np.eye(3))


def test_unitary_superop_matches_conjugation(rng):
    u = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    lhs = (unitary_superop(u) @ op.reshape(-1)).reshape(4, 4)
    np.testing.assert_allclose(lhs, u @ op @ np.conj(u).T, atol=1e-12)


# ---------------------------------------------------------------------------
# conversion commutativity (module invariant)
# ---------------------------------------------------------------------------

def test_conversion_paths_commute(rng):
    for _ in range(20):
        kraus = random_cptp_kraus(rng)
        lam = kraus_to_natural(kraus)
        chi = kraus_to_choi(kraus)
        np.testing.assert_allclose(lam, reshuffle(chi), atol=1e-12)
        np.testing.assert_allclose(
            kraus_to_ptm(kraus), natural_to_ptm(lam), atol=1e-12
        )
        back = choi_to_kraus(chi)
        np.testing.assert_allclose(kraus_to_ptm(back), kraus_to_ptm(kraus), atol=1e-12)


def test_unitary_composed_with_inverse_has_unit_fidelity(rng):
    u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    lam = kraus_to_natural([np.conj(u).T]) @ kraus_to_natural([u])
    assert abs(channel_fidelity(natural_to_ptm(lam)) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_serialization_roundtrip_all_forms(rng):
    kraus = random_cptp_kraus(rng)
    eta = kraus_to_ptm(kraus)
    cases = [
        ("ptm", eta),
        ("kraus", kraus),
        ("natural", kraus_to_natural(kraus)),
        ("choi", kraus_to_choi(kraus)),
    ]
    for form, data in cases:
        obj = channel_to_json(form, data)
        assert obj["form"] == form and obj["dim"] == 2
        form2, data2 = channel_from_json(obj)
        assert form2 == form
        if form == "kraus":
            for a, b in zip(data, data2):
                np.testing.assert_allclose(a, b)
        else:
            np.testing.assert_allclose(data, data2)
        np.testing.assert_allclose(
            natural_to_ptm(json_to_natural(obj)), eta, atol=1e-12
        )


def test_serialization_rejects_unknown_form():
    with pytest.raises(ValueError):
        channel_from_json({"form": "nope", "dim": 2, "data": []})
