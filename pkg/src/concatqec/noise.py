"""Physical noise constructors: base models, random unitary perturbations,
perturbed mixtures and their exact averages.

The perturbed model mixes a one-parameter base channel N of fidelity f with a
random one-qubit unitary u(omega), weight k:

    eps(omega) = (1 - k) N + k u(omega),
    u(omega):  rho -> U rho U^dag,
    U = cos(theta) I + i sin(theta) n(gamma, phi) . sigma.

theta and gamma are uniform on [0, 2pi); phi carries the sin(phi)/2 density
(cos phi uniform on [-1, 1]), which makes the exact unitary average equal to
diag(1, 1/3, 1/3, 1/3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    channel_fidelity,
    convex_combine,
    kraus_to_ptm,
    ptm_cptp_deviation,
)
from .pauli import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z

TWO_PI = 2.0 * np.pi

#: exact average PTM of a random unitary channel
AVERAGE_UNITARY_PTM = np.diag([1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0])

#: Kraus form of the same average channel
AVERAGE_UNITARY_KRAUS = (
    np.sqrt(1.0 / 2.0) * PAULI_I,
    np.sqrt(1.0 / 6.0) * PAULI_X,
    np.sqrt(1.0 / 6.0) * PAULI_Y,
    np.sqrt(1.0 / 6.0) * PAULI_Z,
)


class GenerationError(RuntimeError):
    """Raised when random channel generation fails to reach the target fidelity."""


# ---------------------------------------------------------------------------
# base models
# ---------------------------------------------------------------------------

def _check_fidelity_range(f: float) -> None:
    if not 0.25 < f <= 1.0:
        raise ValueError(f"base-model fidelity {f} outside (0.25, 1]")


def depolarizing_ptm(f: float) -> np.ndarray:
    """Depolarizing channel with channel fidelity f: diag(1, p, p, p), p = (4f-1)/3."""
    _check_fidelity_range(f)
    p = (4.0 * f - 1.0) / 3.0
    return np.diag([1.0, p, p, p])


def amplitude_damping_kraus(f: float) -> list[np.ndarray]:
    """Amplitude damping with channel fidelity f.

    The damping rate solves F = f exactly: gamma = 1 - (2 sqrt(f) - 1)^2.
    """
    _check_fidelity_range(f)
    gamma = amplitude_damping_rate(f)
    e0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    e1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return [e0, e1]


def amplitude_damping_rate(f: float) -> float:
    _check_fidelity_range(f)
    return 1.0 - (2.0 * np.sqrt(f) - 1.0) ** 2


# ---------------------------------------------------------------------------
# random unitary perturbations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseSample:
    """Parameters of one random unitary perturbation."""

    theta: float
    gamma: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta < TWO_PI:
            raise ValueError(f"theta {self.theta} outside [0, 2pi)")
        if not 0.0 <= self.gamma < TWO_PI:
            raise ValueError(f"gamma {self.gamma} outside [0, 2pi)")
        if not 0.0 <= self.phi <= np.pi:
            raise ValueError(f"phi {self.phi} outside [0, pi]")

    @property
    def axis(self) -> np.ndarray:
        s = np.sin(self.phi)
        return np.array([s * np.cos(self.gamma), s * np.sin(self.gamma), np.cos(self.phi)])


def sample_unitary(rng: np.random.Generator) -> NoiseSample:
    """Draw one NoiseSample: theta, gamma uniform; cos(phi) uniform on [-1, 1]."""
    theta = rng.uniform(0.0, TWO_PI)
    gamma = rng.uniform(0.0, TWO_PI)
    phi = np.arccos(rng.uniform(-1.0, 1.0))
    return NoiseSample(theta, gamma, phi)


def sample_unitary_batch(rng: np.random.Generator, count: int):
    """Vectorized draw of `count` samples; returns (theta, gamma, phi) arrays."""
    theta = rng.uniform(0.0, TWO_PI, size=count)
    gamma = rng.uniform(0.0, TWO_PI, size=count)
    phi = np.arccos(rng.uniform(-1.0, 1.0, size=count))
    return theta, gamma, phi


def unitary_matrix(sample: NoiseSample) -> np.ndarray:
    """U = cos(theta) I + i sin(theta) n . sigma."""
    n = sample.axis
    nsigma = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    return np.cos(sample.theta) * PAULI_I + 1.0j * np.sin(sample.theta) * nsigma


def unitary_channel_ptm(sample: NoiseSample) -> np.ndarray:
    """PTM of the unitary channel: a rotation block; fidelity = cos^2(theta)."""
    eta = unitary_channel_ptm_batch(
        np.array([sample.theta]), np.array([sample.gamma]), np.array([sample.phi])
    )
    return eta[0]


def unitary_channel_ptm_batch(theta, gamma, phi) -> np.ndarray:
    """Rotation-block PTMs for sample arrays, shape (N, 4, 4).

    Rodrigues form of the Bloch rotation generated by conjugation with
    cos(theta) I + i sin(theta) n . sigma (angle -2 theta about n).
    """
    theta = np.asarray(theta, dtype=float)
    s = np.sin(phi)
    n = np.stack([s * np.cos(gamma), s * np.sin(gamma), np.cos(phi)], axis=-1)  # (N, 3)
    c2 = np.cos(2.0 * theta)
    s2 = np.sin(2.0 * theta)
    count = theta.shape[0]
    eta = np.zeros((count, 4, 4))
    eta[:, 0, 0] = 1.0
    block = (
        c2[:, None, None] * np.eye(3)
        + (1.0 - c2)[:, None, None] * n[:, :, None] * n[:, None, :]
    )
    # antisymmetric part: +s2 * n3 on (x,y), cyclic
    block[:, 0, 1] += s2 * n[:, 2]
    block[:, 1, 0] -= s2 * n[:, 2]
    block[:, 0, 2] -= s2 * n[:, 1]
    block[:, 2, 0] += s2 * n[:, 1]
    block[:, 1, 2] += s2 * n[:, 0]
    block[:, 2, 1] -= s2 * n[:, 0]
    eta[:, 1:, 1:] = block
    return eta


# ---------------------------------------------------------------------------
# model specs
# ---------------------------------------------------------------------------

BASE_KINDS = ("depolarizing", "amplitude_damping", "fixture", "random_cptp")


@dataclass(frozen=True)
class BaseModelSpec:
    """One-parameter base noise model of target channel fidelity f.

    For kind "fixture" the fidelity is read back from the fixture channel
    rather than imposed; pass f=None.
    """

    kind: str
    f: float | None = None
    fixture: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in BASE_KINDS:
            raise ValueError(f"unknown base model kind {self.kind!r}")
        if self.kind == "fixture":
            if self.fixture not in FIXTURES:
                raise ValueError(f"unknown fixture {self.fixture!r}; have {sorted(FIXTURES)}")
        else:
            if self.f is None:
                raise ValueError(f"base model {self.kind!r} requires a fidelity f")
            _check_fidelity_range(self.f)
        if self.kind == "random_cptp" and self.seed is None:
            raise ValueError("random_cptp base model requires a seed")

    def kraus(self) -> list[np.ndarray]:
        if self.kind == "depolarizing":
            p = (4.0 * self.f - 1.0) / 3.0
            w = (1.0 - p) / 4.0  # per-Pauli weight giving diag(1, p, p, p)
            return [
                np.sqrt(1.0 - 3.0 * w) * PAULI_I,
                np.sqrt(w) * PAULI_X,
                np.sqrt(w) * PAULI_Y,
                np.sqrt(w) * PAULI_Z,
            ]
        if self.kind == "amplitude_damping":
            return amplitude_damping_kraus(self.f)
        if self.kind == "fixture":
            return [e.copy() for e in FIXTURES[self.fixture]]
        return random_cptp_with_fidelity(self.f, np.random.default_rng(self.seed))

    def ptm(self) -> np.ndarray:
        if self.kind == "depolarizing":
            return depolarizing_ptm(self.f)
        eta = kraus_to_ptm(self.kraus())
        if self.kind != "fixture" and abs(channel_fidelity(eta) - self.f) > 1e-6:
            raise GenerationError(
                f"{self.kind} channel fidelity {channel_fidelity(eta)} != target {self.f}"
            )
        return eta

    def fidelity(self) -> float:
        if self.kind == "fixture":
            return channel_fidelity(self.ptm())
        return self.f

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.f is not None:
            out["f"] = self.f
        if self.fixture is not None:
            out["fixture"] = self.fixture
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "BaseModelSpec":
        return cls(
            kind=obj["kind"],
            f=obj.get("f"),
            fixture=obj.get("fixture"),
            seed=obj.get("seed"),
        )


@dataclass(frozen=True)
class PerturbedModelSpec:
    """Base model mixed with a random unitary of weight k (kept below 10%)."""

    base: BaseModelSpec
    k: float
    allow_large_k: bool = False

    def __post_init__(self):
        if self.k < 0.0 or (self.k > 0.1 and not self.allow_large_k):
            raise ValueError(f"mixing weight k={self.k} outside [0, 0.1]")
        if self.k > 1.0:
            raise ValueError(f"mixing weight k={self.k} exceeds 1")


def perturbed_channel(spec: PerturbedModelSpec, sample: NoiseSample) -> np.ndarray:
    """PTM of (1-k) base + k u(omega); fidelity (1-k) f + k cos^2(theta)."""
    return convex_combine(
        [1.0 - spec.k, spec.k], [spec.base.ptm(), unitary_channel_ptm(sample)]
    )


def perturbed_channel_batch(spec: PerturbedModelSpec, theta, gamma, phi) -> np.ndarray:
    """PTMs of a whole sample batch at once, shape (N, 4, 4)."""
    unit = unitary_channel_ptm_batch(theta, gamma, phi)
    return (1.0 - spec.k) * spec.base.ptm()[None, :, :] + spec.k * unit


def average_perturbed(spec: PerturbedModelSpec) -> np.ndarray:
    """Exact average PTM: (1-k) base + k diag(1, 1/3, 1/3, 1/3)."""
    return convex_combine([1.0 - spec.k, spec.k], [spec.base.ptm(), AVERAGE_UNITARY_PTM])


# ---------------------------------------------------------------------------
# random CPTP generation
# ---------------------------------------------------------------------------

def random_cptp_kraus(rng: np.random.Generator, n_kraus: int = 4) -> list[np.ndarray]:
    """Haar-random CPTP map on one qubit via an isometry column construction."""
    z = rng.normal(size=(2 * n_kraus, 2)) + 1.0j * rng.normal(size=(2 * n_kraus, 2))
    q, _ = np.linalg.qr(z)
    return [q[2 * m : 2 * m + 2, :] for m in range(n_kraus)]


def random_cptp_with_fidelity(
    f: float, rng: np.random.Generator, max_iter: int = 200
) -> list[np.ndarray]:
    """Random CPTP channel with channel fidelity f (within 1e-6).

    Draws a random 4-Kraus map, then mixes it with the identity channel,
    bisecting on the mixing weight until the fidelity hits f.
    """
    _check_fidelity_range(f)
    base = random_cptp_kraus(rng)
    f0 = channel_fidelity(kraus_to_ptm(base))
    if f0 > f:
        raise GenerationError(f"random channel fidelity {f0:.4f} already above target {f}")

    def mixed(w: float) -> list[np.ndarray]:
        ops = [np.sqrt(1.0 - w) * e for e in base]
        ops.append(np.sqrt(w) * PAULI_I)
        return ops

    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        w = 0.5 * (lo + hi)
        fw = channel_fidelity(kraus_to_ptm(mixed(w)))
        if abs(fw - f) < 1e-9:
            return mixed(w)
        if fw < f:
            lo = w
        else:
            hi = w
    raise GenerationError(f"fidelity bisection did not converge after {max_iter} iterations")


# ---------------------------------------------------------------------------
# appendix fixtures: three verbatim arbitrary-noise Kraus quadruples
# ---------------------------------------------------------------------------

def _k(rows) -> np.ndarray:
    m = np.array(rows, dtype=complex)
    m.setflags(write=False)
    return m

FIXTURES: dict[str, tuple[np.ndarray, ...]] = {
    # channel fidelity 0.98; the 0.9704 names the mixed-average fidelity at k=0.02
    "an_0.9704": (
        _k([[0.756784, -0.0493575 + 0.0480098j],
            [-0.0493575 - 0.0480098j, 0.78349]]),
        _k([[0.0267779 - 0.0260467j, -0.00125374 + 0.0452789j],
            [0.0308079, -0.0267779 + 0.0260467j]]),
        _k([[0.0349194 + 0.0339659j, 0.0401748],
            [-0.00163493 - 0.0590456j, -0.0349194 - 0.0339659j]]),
        _k([[0.638225, 0.0599647 - 0.0583273j],
            [0.0599647 + 0.0583273j, 0.605781]]),
    ),
    # channel fidelity 0.98; mixed-average fidelity 0.948 at k=1/15
    "an_0.948": (
        _k([[-0.524991, 0.0326596 + 0.0688087j],
            [0.0326596 - 0.0688087j, -0.41504]]),
        _k([[-0.0197012 - 0.0415073j, 0.0567946 - 0.0695926j],
            [0.0235008, 0.0197012 + 0.0415073j]]),
        _k([[0.0120814 - 0.0254537j, -0.0144115],
            [-0.0348284 - 0.0426766j, -0.0120814 + 0.0254537j]]),
        _k([[0.842943, 0.0168194 + 0.0354358j],
            [0.0168194 - 0.0354358j, 0.899567]]),
    ),
    # channel fidelity 0.94; mixed-average fidelity 0.918 at k=0.05
    "an_0.918": (
        _k([[0.55782, 0.0184139 - 0.0299884j],
            [0.0184139 + 0.0299884j, 0.264979]]),
        _k([[0.0135882 - 0.0221294j, 0.0991524 + 0.195463j],
            [0.00307679, -0.0135882 + 0.0221294j]]),
        _k([[0.00812856 + 0.0132379j, 0.00184055],
            [0.0593135 - 0.116927j, -0.00812856 - 0.0132379j]]),
        _k([[0.818093, -0.00752438 + 0.012254j],
            [-0.00752438 - 0.012254j, 0.937755]]),
    ),
}

#: mixing weight of the scenario each fixture was printed for
FIXTURE_CASE_K = {"an_0.9704": 0.02, "an_0.948": 1.0 / 15.0, "an_0.918": 0.05}


def appendix_fixture(name: str) -> list[np.ndarray]:
    """Return one of the transcribed arbitrary-noise Kraus sets (copies)."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; have {sorted(FIXTURES)}")
    return [e.copy() for e in FIXTURES[name]]
