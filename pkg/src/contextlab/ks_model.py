"""Kochen-Specker noncontextual hidden-variable model for a single qubit.

Hidden variables are unit vectors ``n_lambda`` on the sphere.  A state with
Bloch vector ``n_a`` prepares them with density ``(n_lambda . n_a)/pi`` on the
hemisphere around ``n_a`` (zero elsewhere), per unit solid angle.  An
observable ``a0 + avec . sigma`` takes the value ``a0 + |avec| sgn(n_lambda . ahat)``.

Passing the array replaces the preparation direction ``z`` by the tilted
direction of the exit channel: ``-(sin 2t, 0, cos 2t)`` for port 3 and
``+(sin 2t, 0, cos 2t)`` for port 4, each channel taken with probability 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple, Sequence

import numpy as np
from scipy.special import roots_legendre

from .qubit import INPUT_TOL, BlochVector, Observable, spin_theta_observable
from .errors import InvalidVectorError

Z_HAT = BlochVector(0.0, 0.0, 1.0)
MIN_QUADRATURE_NODES = 64
DEFAULT_CHUNK = 1 << 18

RngLike = np.random.Generator | int | np.random.SeedSequence | None


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _seed_record(rng: RngLike):
    if isinstance(rng, np.random.Generator):
        seq = getattr(rng.bit_generator, "seed_seq", None)
        if isinstance(seq, np.random.SeedSequence):
            return {"entropy": seq.entropy, "spawn_key": tuple(seq.spawn_key)}
        return None
    if isinstance(rng, np.random.SeedSequence):
        return {"entropy": rng.entropy, "spawn_key": tuple(rng.spawn_key)}
    return rng


def _unit(n: BlochVector) -> np.ndarray:
    v = n.array
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > INPUT_TOL:
        raise InvalidVectorError(f"support direction is not unit (norm = {norm!r})")
    return v


@dataclass(frozen=True)
class HiddenVar:
    n_lambda: BlochVector

    @property
    def polar(self) -> float:
        return float(np.arccos(np.clip(self.n_lambda.z, -1.0, 1.0)))

    @property
    def azimuth(self) -> float:
        return float(np.arctan2(self.n_lambda.y, self.n_lambda.x))


@dataclass(frozen=True, eq=False)
class KSEnsemble:
    """Sampled hidden variables; ``vectors`` is an ``(N, 3)`` array."""

    support_direction: BlochVector
    vectors: np.ndarray
    seed_record: object = None

    def __len__(self) -> int:
        return len(self.vectors)

    def __getitem__(self, i: int) -> HiddenVar:
        return HiddenVar(BlochVector.from_array(self.vectors[i]))

    def __iter__(self) -> Iterator[HiddenVar]:
        return (self[i] for i in range(len(self)))

    @property
    def members(self) -> Sequence[HiddenVar]:
        return list(self)


@dataclass(frozen=True)
class ChannelOutcome:
    port: int
    post_var: HiddenVar


class KSEstimate(NamedTuple):
    sg1_est: float
    sg1_se: float
    sg2_est: float
    sg2_se: float


def frame_from_pole(n: np.ndarray) -> np.ndarray:
    """Rotation taking ``z`` to unit vector ``n`` (identity when ``n`` is ``z``)."""
    n = np.asarray(n, dtype=float)
    c = n[2]
    if c > -0.5:
        k = np.array([-n[1], n[0], 0.0])  # z x n
        kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
        return np.eye(3) + kx + kx @ kx / (1.0 + c)
    # Rodrigues degenerates at the south pole; compose with a half-turn about x
    flip = np.diag([1.0, -1.0, -1.0])
    return flip @ frame_from_pole(flip @ n)


def _rotate(local: np.ndarray, n: np.ndarray) -> np.ndarray:
    if n[0] == 0.0 and n[1] == 0.0 and n[2] == 1.0:
        return local
    return local @ frame_from_pole(n).T


def density(n_a: BlochVector, n_lambda: BlochVector) -> float:
    c = float(np.dot(n_a.array, n_lambda.array))
    return c / np.pi if c > 0.0 else 0.0


def density_from_projection(c: np.ndarray) -> np.ndarray:
    """Density given ``c = n_lambda . n_a``; the boundary ``c = 0`` gets 0."""
    return np.where(c > 0.0, c / np.pi, 0.0)


def density_values(n_a: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return density_from_projection(vectors @ np.asarray(n_a, dtype=float))


def hemisphere_local(count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` vectors from the cosine density around ``z``.

    Polar angle by inverse CDF: ``sin^2(polar) = u``; azimuth uniform.
    """
    u = rng.random(count)
    v = rng.random(count)
    # polar = arcsin(sqrt(u)), so sin(polar) = sqrt(u) and cos(polar) = sqrt(1 - u) > 0
    s = np.sqrt(u)
    azimuth = 2 * np.pi * v
    return np.column_stack([s * np.cos(azimuth), s * np.sin(azimuth), np.sqrt(1.0 - u)])


def sample(n_a: BlochVector, count: int, rng: RngLike) -> KSEnsemble:
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count!r}")
    pole = _unit(n_a)
    gen = as_generator(rng)
    vectors = _rotate(hemisphere_local(int(count), gen), pole)
    return KSEnsemble(n_a, vectors, _seed_record(rng))


def response(A: Observable, lam: HiddenVar) -> float:
    r = A.magnitude
    if r == 0.0:
        return A.a0
    proj = float(np.dot(A.vector, lam.n_lambda.array))
    return A.a0 + r if proj >= 0.0 else A.a0 - r


def response_from_projection(A: Observable, proj: np.ndarray, sign: float = 1.0) -> np.ndarray:
    """Response given ``proj = n_lambda . avec``; ``sign=-1`` inverts sgn (fault injection)."""
    r = A.magnitude
    if r == 0.0:
        return np.full(np.shape(proj), A.a0)
    return np.where(proj >= 0.0, A.a0 + sign * r, A.a0 - sign * r)


def response_values(A: Observable, vectors: np.ndarray, sign: float = 1.0) -> np.ndarray:
    """Vectorized :func:`response` over an ``(N, 3)`` array."""
    return response_from_projection(A, vectors @ A.vector, sign)


def analytic_expectation(A: Observable, n_psi: BlochVector) -> float:
    return A.a0 + float(np.dot(A.vector, _unit(n_psi)))


@lru_cache(maxsize=8)
def hemisphere_nodes(n_nodes: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre in ``cos(polar)`` on [0, 1] and trapezoid azimuth nodes.

    Returns ``(mu, mu_weights, azimuth)``; the azimuth weight is ``2pi/n_nodes``.
    Azimuth nodes sit at half-integer offsets so that, for even ``n_nodes``, none
    falls on a coordinate axis where symmetric sgn ties would bias the sum.
    """
    x, w = roots_legendre(n_nodes)
    mu = 0.5 * (x + 1.0)
    return mu, 0.5 * w, (np.arange(n_nodes) + 0.5) * (2 * np.pi / n_nodes)


class NodeBlock:
    """A block of product-rule nodes: rows of polar nodes times all azimuth nodes."""

    def __init__(self, mu: np.ndarray, cos_az: np.ndarray, sin_az: np.ndarray, rot: np.ndarray):
        self.mu = mu
        self.sin_polar = np.sqrt(1.0 - mu * mu)
        self.cos_az = cos_az
        self.sin_az = sin_az
        self.rot = rot

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.mu), len(self.cos_az)

    def dot(self, a) -> np.ndarray:
        """``n_lambda . a`` at every node, shape ``(rows, n_azimuth)``."""
        p = self.rot.T @ np.asarray(a, dtype=float)
        ring = self.cos_az * p[0] + self.sin_az * p[1]
        return np.multiply.outer(self.sin_polar, ring) + (self.mu * p[2])[:, None]

    @property
    def vectors(self) -> np.ndarray:
        return np.stack([self.dot(e) for e in np.eye(3)], axis=-1)


def integrate_sphere(
    f, pole: BlochVector, n_nodes: int, *, hemisphere_only: bool = False, rows_per_chunk: int = 32
) -> float:
    """Product-rule integral over the sphere (or the hemisphere around ``pole``).

    The frame has ``pole`` as polar axis.  ``f`` maps a :class:`NodeBlock` to an
    array of integrand values of the block's shape.  Each hemisphere is
    integrated separately so a jump across the equator of ``pole`` falls on a
    cell boundary.
    """
    if n_nodes < MIN_QUADRATURE_NODES:
        raise ValueError(f"n_nodes must be >= {MIN_QUADRATURE_NODES}, got {n_nodes!r}")
    rot = frame_from_pole(_unit(pole))
    mu, mu_w, az = hemisphere_nodes(n_nodes)
    cos_az, sin_az = np.cos(az), np.sin(az)
    dphi = 2 * np.pi / n_nodes
    total = 0.0
    for sign in (1.0,) if hemisphere_only else (1.0, -1.0):
        for lo in range(0, n_nodes, rows_per_chunk):
            block = NodeBlock(sign * mu[lo : lo + rows_per_chunk], cos_az, sin_az, rot)
            vals = np.asarray(f(block))
            total += float(mu_w[lo : lo + rows_per_chunk] @ vals.sum(axis=1)) * dphi
    return total


def density_integral(n_a: BlochVector, n_nodes: int = 256) -> float:
    na = _unit(n_a)
    return integrate_sphere(lambda b: density_from_projection(b.dot(na)), n_a, n_nodes)


def quadrature_expectation(A: Observable, n_psi: BlochVector, n_nodes: int) -> float:
    """Spherical quadrature of ``density * response`` over the support hemisphere."""
    npsi = _unit(n_psi)
    return integrate_sphere(
        lambda b: density_from_projection(b.dot(npsi)) * response_from_projection(A, b.dot(A.vector)),
        n_psi,
        n_nodes,
        hemisphere_only=True,
    )


def port_direction(vartheta: float, port: int) -> BlochVector:
    up = np.array([np.sin(2 * vartheta), 0.0, np.cos(2 * vartheta)])
    if port == 4:
        return BlochVector.from_array(up)
    if port == 3:
        return BlochVector.from_array(-up)
    raise ValueError(f"port must be 3 or 4, got {port!r}")


def mz_channel_transitions(
    vartheta: float, count: int, rng: RngLike
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized channel flip: returns ``(ports, post_vectors)``.

    Draw order is fixed: local hemisphere coordinates first, then the port coin.
    """
    gen = as_generator(rng)
    local = hemisphere_local(int(count), gen)
    to_port3 = gen.random(count) < 0.5
    ports = np.where(to_port3, 3, 4)
    post = np.empty_like(local)
    for port, mask in ((3, to_port3), (4, ~to_port3)):
        post[mask] = _rotate(local[mask], port_direction(vartheta, port).array)
    return ports, post


def mz_channel_transition(vartheta: float, rng: RngLike) -> ChannelOutcome:
    ports, post = mz_channel_transitions(vartheta, 1, rng)
    return ChannelOutcome(int(ports[0]), HiddenVar(BlochVector.from_array(post[0])))


def ks_subensemble_means(
    vartheta: float,
    theta: float,
    count: int,
    rng: RngLike,
    *,
    invert_response: bool = False,
    chunk: int = DEFAULT_CHUNK,
) -> KSEstimate:
    """Monte Carlo estimate of the weighted port means of ``sigma_theta``.

    Each particle contributes ``1[port] * response`` to its port's estimate,
    divided by the total count, so the estimates target ``P(port) * <sigma>``.
    Standard errors use the plug-in population variance.
    """
    if count < 100:
        raise ValueError(f"count must be >= 100, got {count!r}")
    gen = as_generator(rng)
    obs = spin_theta_observable(theta)
    sign = -1.0 if invert_response else 1.0
    sums = np.zeros(2)
    squares = np.zeros(2)
    done = 0
    while done < count:
        n = min(chunk, count - done)
        ports, post = mz_channel_transitions(vartheta, n, gen)
        vals = response_values(obs, post, sign)
        for k, port in enumerate((3, 4)):
            x = np.where(ports == port, vals, 0.0)
            sums[k] += x.sum()
            squares[k] += (x * x).sum()
        done += n
    means = sums / count
    var = np.maximum(squares / count - means**2, 0.0)
    se = np.sqrt(var / count)
    return KSEstimate(float(means[0]), float(se[0]), float(means[1]), float(se[1]))
