"""Maps from the sphere ``S^D`` onto the complex Stiefel and Grassmann manifolds.

Both maps use geodesic normal coordinates around the reference point
``[1; 0]`` (a ``T x n_t`` matrix).  The pole of the sphere is its *last*
coordinate: a unit vector is written ``p = (sin(theta) v, cos(theta))`` and
``theta`` becomes the geodesic distance from the reference point (times the
scale ``s``), while the unit vector ``v`` picks the tangent direction.

Tangent coordinates are laid out row-major with the real part of an entry
followed by its imaginary part.  For the Stiefel map the skew-Hermitian block
``A`` comes first (imaginary diagonal, then the strictly upper entries scaled
by ``1/sqrt(2)``), followed by the ``(T - n_t) x n_t`` block ``B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainMismatchError, InjectivityError, InvalidSpecError

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class ManifoldDims:
    """Manifold ``V(n_t, T)`` or ``G(n_t, T)``; ``D`` is its real dimension.

    Passing ``D`` explicitly makes the constructor verify it.
    """

    n_t: int
    T: int
    kind: str = "grassmann"
    D: int | None = None

    def __post_init__(self):
        if self.kind not in ("stiefel", "grassmann"):
            raise InvalidSpecError(f"unknown manifold kind {self.kind!r}")
        # T == n_t is the unitary group itself, a valid (if trivial) Stiefel manifold
        min_T = self.n_t if self.kind == "stiefel" else self.n_t + 1
        if self.n_t < 1 or self.T < min_T:
            raise InvalidSpecError(f"{self.kind} manifold needs n_t >= 1 and T >= {min_T}, got T={self.T}")
        if self.kind == "stiefel":
            D = self.n_t * (2 * self.T - self.n_t)
        else:
            D = 2 * self.n_t * (self.T - self.n_t)
        if self.D is not None and self.D != D:
            raise InvalidSpecError(f"{self.kind} manifold with n_t={self.n_t}, T={self.T} has dimension {D}, not {self.D}")
        object.__setattr__(self, "D", D)

    @classmethod
    def stiefel(cls, n_t: int, T: int) -> "ManifoldDims":
        return cls(n_t, T, "stiefel")

    @classmethod
    def grassmann(cls, n_t: int, T: int) -> "ManifoldDims":
        return cls(n_t, T, "grassmann")

    def check(self, D: int) -> None:
        if D != self.D:
            raise DomainMismatchError(f"{self.kind} V/G({self.n_t},{self.T}) has dimension {self.D}, got sphere S^{D}")


def reference_point(n_t: int, T: int) -> np.ndarray:
    ref = np.zeros((T, n_t), dtype=complex)
    ref[:n_t, :n_t] = np.eye(n_t)
    return ref


def polar_coordinates(p: np.ndarray) -> tuple[float, np.ndarray]:
    """Split a unit vector into ``(theta, v)`` with ``p = (sin(theta) v, cos(theta))``."""
    p = np.asarray(p, dtype=float)
    tangent = p[:-1]
    r = float(np.linalg.norm(tangent))
    theta = math.atan2(r, float(p[-1]))
    v = tangent / r if r > 0 else np.zeros_like(tangent)
    return theta, v


def grassmann_tangent(v: np.ndarray, n_t: int, T: int) -> np.ndarray:
    """Real coordinates -> complex ``(T - n_t) x n_t`` block (isometric)."""
    pairs = np.asarray(v, dtype=float).reshape(T - n_t, n_t, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]


def stiefel_tangent(v: np.ndarray, n_t: int, T: int) -> np.ndarray:
    """Real coordinates -> skew-Hermitian ``T x T`` generator ``[[A, -B*], [B, 0]]``."""
    v = np.asarray(v, dtype=float)
    A = np.zeros((n_t, n_t), dtype=complex)
    A[np.diag_indices(n_t)] = 1j * v[:n_t]
    pos = n_t
    for j in range(n_t):
        for k in range(j + 1, n_t):
            z = (v[pos] + 1j * v[pos + 1]) / math.sqrt(2)
            A[j, k], A[k, j] = z, -np.conj(z)
            pos += 2
    B = grassmann_tangent(v[pos:], n_t, T)
    Xi = np.zeros((T, T), dtype=complex)
    Xi[:n_t, :n_t] = A
    Xi[n_t:, :n_t] = B
    Xi[:n_t, n_t:] = -B.conj().T
    return Xi


def _check_unit(p: np.ndarray) -> None:
    if abs(np.linalg.norm(p) - 1.0) > 1e-10:
        raise InvalidSpecError("sphere point must have unit norm")


def sphere_to_grassmann(p, dims: ManifoldDims, scale: float = 1.0) -> np.ndarray:
    """Orthonormal representative of the subspace assigned to ``p``.

    With ``B = U S V*`` (thin SVD) the result is
    ``[I + V (cos(s theta S) - I) V*; U sin(s theta S) V*]``, i.e. the
    geodesic from ``<[1; 0]>`` with principal angles ``s theta S``.

    Raises
    ------
    DomainMismatchError
        If ``p`` lies in the open lower hemisphere or has the wrong length.
    InjectivityError
        If ``scale * theta`` exceeds ``pi / 2``.
    """
    p = np.asarray(p, dtype=float)
    dims.check(p.size - 1)
    _check_unit(p)
    if p[-1] < -1e-12:
        raise DomainMismatchError("point lies below the equator; hemisphere-filter the code first")
    theta, v = polar_coordinates(p)
    angle = scale * theta
    if angle > math.pi / 2 + 1e-12:
        raise InjectivityError(f"scale * theta = {angle:.6g} exceeds pi/2")
    n_t, T = dims.n_t, dims.T
    B = grassmann_tangent(v, n_t, T)
    U, S, Vh = np.linalg.svd(B, full_matrices=False)
    top = np.eye(n_t, dtype=complex) + (Vh.conj().T * (np.cos(angle * S) - 1.0)) @ Vh
    bottom = (U * np.sin(angle * S)) @ Vh
    return np.vstack([top, bottom])


def expm_skew_hermitian(Xi: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(t Xi)`` for skew-Hermitian ``Xi`` via the eigenvectors of ``i Xi``."""
    w, V = np.linalg.eigh(1j * Xi)
    return (V * np.exp(-1j * t * w)) @ V.conj().T


def sphere_to_stiefel(p, dims: ManifoldDims, scale: float = 1.0) -> np.ndarray:
    """Stiefel point ``exp(s theta Xi) [1; 0]`` for the tangent direction of ``p``."""
    p = np.asarray(p, dtype=float)
    dims.check(p.size - 1)
    _check_unit(p)
    theta, v = polar_coordinates(p)
    if scale * theta > math.pi + 1e-12:
        raise InjectivityError(f"scale * theta = {scale * theta:.6g} exceeds pi")
    Xi = stiefel_tangent(v, dims.n_t, dims.T)
    return expm_skew_hermitian(Xi, scale * theta)[:, : dims.n_t]


def is_orthonormal(Phi: np.ndarray, tol: float = ORTHO_TOL) -> bool:
    n_t = Phi.shape[-1]
    return float(np.linalg.norm(Phi.conj().T @ Phi - np.eye(n_t))) < tol


def _same_shape(Phi, Psi):
    Phi, Psi = np.asarray(Phi), np.asarray(Psi)
    if Phi.shape != Psi.shape:
        raise DomainMismatchError(f"shape mismatch {Phi.shape} vs {Psi.shape}")
    return Phi, Psi


def coherent_distance(Phi, Psi) -> float:
    Phi, Psi = _same_shape(Phi, Psi)
    return float(np.linalg.norm(Phi - Psi))


def noncoherent_distance(Phi, Psi) -> float:
    """Chordal subspace distance ``sqrt(n_t - ||Phi* Psi||_F^2)``."""
    Phi, Psi = _same_shape(Phi, Psi)
    d2 = Phi.shape[1] - float(np.linalg.norm(Phi.conj().T @ Psi) ** 2)
    return math.sqrt(max(d2, 0.0))


def principal_angles(Phi, Psi) -> np.ndarray:
    """Principal angles between ``<Phi>`` and ``<Psi>``, ascending."""
    Phi, Psi = _same_shape(Phi, Psi)
    s = np.linalg.svd(Phi.conj().T @ Psi, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))
