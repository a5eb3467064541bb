"""Two-level state algebra, the spin (x) path product space, and the Bloch map.

Observables are stored as ``(a0, avec)`` with ``A = a0*I + avec . sigma``.
The Stern-Gerlach observable at orientation ``theta`` is taken in the x-z
plane, ``avec = (sin 2theta, 0, cos 2theta)``: its expectation in the tilted
state ``cos(t)|up> + sin(t)|down>`` (Bloch vector ``(sin 2t, 0, cos 2t)``) is
then ``cos(2(t - theta))``.  That is the only x-z choice giving real cosines
for both exit ports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidStateError, InvalidVectorError, ZeroBranchError

INPUT_TOL = 1e-9
ZERO_BRANCH = 1e-15

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

PathBasis = Literal["input", "output"]


@dataclass(frozen=True)
class SpinState:
    """Amplitudes on ``{|up>_z, |down>_z}``. Not validated on construction."""

    c_up: complex
    c_down: complex

    def __post_init__(self):
        object.__setattr__(self, "c_up", complex(self.c_up))
        object.__setattr__(self, "c_down", complex(self.c_down))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.c_up, self.c_down], dtype=complex)

    @classmethod
    def from_vector(cls, v) -> SpinState:
        v = np.asarray(v, dtype=complex)
        return cls(complex(v[0]), complex(v[1]))

    def norm(self) -> float:
        return float(np.sqrt(abs(self.c_up) ** 2 + abs(self.c_down) ** 2))

    def phase(self, alpha: float) -> SpinState:
        f = np.exp(1j * alpha)
        return SpinState(self.c_up * f, self.c_down * f)


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a) -> BlochVector:
        return cls(float(a[0]), float(a[1]), float(a[2]))

    @classmethod
    def from_angles(cls, polar: float, azimuth: float) -> BlochVector:
        return cls(
            float(np.sin(polar) * np.cos(azimuth)),
            float(np.sin(polar) * np.sin(azimuth)),
            float(np.cos(polar)),
        )

    def norm(self) -> float:
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))

    def __neg__(self) -> BlochVector:
        return BlochVector(-self.x, -self.y, -self.z)


@dataclass(frozen=True)
class Observable:
    """Hermitian ``a0*I + avec . sigma``."""

    a0: float
    avec: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "avec", tuple(float(c) for c in self.avec))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.avec, dtype=float)

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.vector))

    def matrix(self) -> np.ndarray:
        m = self.a0 * IDENTITY
        for a, s in zip(self.avec, PAULIS):
            m = m + a * s
        return m

    @classmethod
    def from_matrix(cls, m) -> Observable:
        m = np.asarray(m, dtype=complex)
        if not np.allclose(m, m.conj().T, atol=1e-12):
            raise ValueError("matrix is not Hermitian")
        a0 = np.trace(m).real / 2
        avec = tuple(np.trace(m @ s).real / 2 for s in PAULIS)
        return cls(a0, avec)


SIGMA_X = Observable(0.0, (1.0, 0.0, 0.0))
SIGMA_Y = Observable(0.0, (0.0, 1.0, 0.0))
SIGMA_Z = Observable(0.0, (0.0, 0.0, 1.0))
IDENTITY_OBS = Observable(1.0, (0.0, 0.0, 0.0))


@dataclass(frozen=True)
class PathState:
    """Two path-mode amplitudes; ``basis`` says which ordered mode pair they refer to."""

    amplitudes: tuple[complex, complex]
    basis: PathBasis = "input"

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(complex(a) for a in self.amplitudes))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=complex)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class JointState:
    """Spin (x) path amplitudes, spin index major: ``(up,p1), (up,p2), (down,p1), (down,p2)``."""

    amplitudes: tuple[complex, complex, complex, complex]
    path_basis: PathBasis = "input"

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(complex(a) for a in self.amplitudes))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=complex)

    @classmethod
    def from_vector(cls, v, path_basis: PathBasis = "input") -> JointState:
        v = np.asarray(v, dtype=complex)
        return cls(tuple(complex(c) for c in v), path_basis)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


def _check_normalized(norm: float, what: str) -> None:
    if abs(norm - 1.0) > INPUT_TOL:
        raise InvalidStateError(f"{what} is not normalized (norm = {norm!r})")


def state_to_bloch(s: SpinState) -> BlochVector:
    """Return ``(<sx>, <sy>, <sz>)`` for a normalized spin state."""
    _check_normalized(s.norm(), "spin state")
    cross = np.conj(s.c_up) * s.c_down
    z = abs(s.c_up) ** 2 - abs(s.c_down) ** 2
    n = np.array([2 * cross.real, 2 * cross.imag, z])
    # absorb residual input-normalization error so the output is unit to 1e-12
    n /= np.linalg.norm(n)
    return BlochVector.from_array(n)


def bloch_to_state(n: BlochVector) -> SpinState:
    """Canonical-phase state for ``n``: ``c_up`` real and non-negative.

    At the south pole the state is ``(0, 1)``.
    """
    norm = n.norm()
    if abs(norm - 1.0) > INPUT_TOL:
        raise InvalidVectorError(f"Bloch vector is not unit (norm = {norm!r})")
    x, y, z = n.x / norm, n.y / norm, n.z / norm
    transverse = complex(x, y)
    if z >= 0.0:
        c_up = np.sqrt((1.0 + z) / 2.0)
        c_down = transverse / (2.0 * c_up)
    else:
        # southern hemisphere: 1 + z loses precision, build from |c_down| instead
        mag_down = np.sqrt((1.0 - z) / 2.0)
        t = abs(transverse)
        c_up = t / (2.0 * mag_down)
        c_down = mag_down * (transverse / t if t > 0.0 else 1.0)
    s = np.array([c_up, c_down], dtype=complex)
    s /= np.linalg.norm(s)
    return SpinState(complex(s[0]), complex(s[1]))


def expectation(A: Observable, s: SpinState) -> float:
    n = state_to_bloch(s)
    return A.a0 + float(np.dot(A.vector, n.array))


def eigenvalues(A: Observable) -> tuple[float, float]:
    r = A.magnitude
    return A.a0 + r, A.a0 - r


def spin_theta_observable(theta: float) -> Observable:
    """Stern-Gerlach observable at orientation ``theta`` (see module notes)."""
    return Observable(0.0, (np.sin(2 * theta), 0.0, np.cos(2 * theta)))


def tensor(s: SpinState, p: PathState) -> JointState:
    _check_normalized(s.norm(), "spin state")
    _check_normalized(p.norm(), "path state")
    return JointState.from_vector(np.kron(s.vector, p.vector), p.basis)


def project_path(J: JointState, p: PathState) -> tuple[SpinState, float]:
    """Condition ``J`` on path ``p``.

    Returns the normalized conditional spin state and the branch probability.
    Raises :class:`ZeroBranchError` when the branch probability is below 1e-15.
    """
    _check_normalized(J.norm(), "joint state")
    _check_normalized(p.norm(), "path state")
    if p.basis != J.path_basis:
        raise ValueError(f"path basis mismatch: state in {J.path_basis!r}, projector in {p.basis!r}")
    amps = J.vector.reshape(2, 2)
    branch = amps @ p.vector.conj()
    prob = float(np.vdot(branch, branch).real)
    if prob < ZERO_BRANCH:
        raise ZeroBranchError(f"branch probability {prob!r} is zero")
    branch = branch / np.sqrt(prob)
    return SpinState.from_vector(branch), min(prob, 1.0)
