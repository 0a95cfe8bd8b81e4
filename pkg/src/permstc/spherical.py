"""Spherical permutation codes and the full-diversity rotation.

Points are stored as rows; a rotation ``R`` acts on a point ``p`` from the
right, ``p -> p @ R``.  The rotation axis is the diagonal ``e = (1, ..., 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .combinatorics import MultisetSpec, Permutation
from .errors import DomainMismatchError, InvalidSpecError

UNIT_TOL = 1e-12
#: Default rotation angle for non-coherent (and composed) codes.
ALPHA_NONCOHERENT = 7 * math.pi / 4
#: Default rotation angle for codes mapped straight onto the Stiefel manifold.
ALPHA_COHERENT = math.pi


@dataclass(frozen=True)
class InitialVector:
    values: tuple[float, ...]
    spec: MultisetSpec
    norm: float
    vector: np.ndarray = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        """Ambient dimension ``D + 1``."""
        return self.spec.n

    def unit_values(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float) / self.norm


def build_initial_vector(values: Sequence[float], multiplicities) -> InitialVector:
    """Expand ``(mu_1^(m_1), ..., mu_k^(m_k))`` and scale it to unit norm.

    Examples
    --------
    >>> x = build_initial_vector((0, 1), (7, 2))
    >>> x.dim, round(x.norm ** 2, 12)
    (9, 2.0)
    """
    spec = multiplicities if isinstance(multiplicities, MultisetSpec) else MultisetSpec(tuple(multiplicities))
    values = tuple(float(v) for v in values)
    if len(values) != spec.k:
        raise InvalidSpecError(f"{len(values)} values for {spec.k} multiplicities")
    if len(set(values)) != len(values):
        raise InvalidSpecError(f"values must be distinct, got {values}")
    expanded = np.repeat(np.asarray(values), spec.multiplicities)
    norm = float(np.linalg.norm(expanded))
    if norm == 0.0:
        raise InvalidSpecError("initial vector is zero and cannot be normalized")
    return InitialVector(values, spec, norm, expanded / norm)


def required_perm_count(R: float, T: int, D: int) -> int:
    """Spherical code size ``N = ceil(2^((D+1) r))`` for space-time rate ``R``,
    where ``r = T R / (D+1)`` is the rate of the spherical code."""
    if R <= 0 or T < 1 or D < 1:
        raise InvalidSpecError(f"need R > 0, T >= 1, D >= 1; got R={R}, T={T}, D={D}")
    r = T * R / (D + 1)
    exponent = (D + 1) * r
    # (D+1)*T*R/(D+1) can land a hair above an integer
    if abs(exponent - round(exponent)) < 1e-9:
        return 2 ** round(exponent)
    return math.ceil(2.0**exponent)


@dataclass(frozen=True)
class SphericalCode:
    points: np.ndarray
    initial: InitialVector | None = None
    indices: tuple[int, ...] = ()
    alpha: float = 0.0

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size and np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) > UNIT_TOL:
            raise InvalidSpecError("spherical code points must have unit norm")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def spherical_code_from_perms(x: InitialVector, perms: Sequence[Permutation],
                              indices: Sequence[int] | None = None) -> SphericalCode:
    """One point per permutation: ``point[j] = unit_value[perm[j]]``."""
    perms = [tuple(p) for p in perms]
    for p in perms:
        if not x.spec.contains(p):
            raise DomainMismatchError(f"permutation {p} is not an arrangement of {x.spec.multiplicities}")
    unit = x.unit_values()
    pts = unit[np.asarray(perms, dtype=np.intp)] if perms else np.empty((0, x.dim))
    idx = tuple(range(len(perms))) if indices is None else tuple(int(i) for i in indices)
    return SphericalCode(pts, initial=x, indices=idx)


def min_distance(code: SphericalCode | np.ndarray) -> float:
    """Smallest Euclidean distance between two distinct points."""
    pts = code.points if isinstance(code, SphericalCode) else np.asarray(code, dtype=float)
    n, dim = pts.shape
    if n < 2:
        raise ValueError("minimum distance needs at least two points")
    chunk = max(1, 4_000_000 // (n * dim))
    best = np.inf
    for start in range(0, n - 1, chunk):
        block = pts[start:start + chunk]
        d2 = np.sum((block[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        rows = np.arange(start, start + len(block))[:, None]
        best = min(best, float(np.where(np.arange(n)[None, :] > rows, d2, np.inf).min()))
    return math.sqrt(best)


def helmert_axis_matrix(dim: int) -> np.ndarray:
    """Orthogonal matrix whose first row is ``e / sqrt(dim)``.

    Row ``j`` (1-based, ``j >= 2``) is ``(1^(j-1), -(j-1), 0^(dim-j)) / sqrt(j (j-1))``.
    """
    if dim < 2:
        raise InvalidSpecError(f"axis matrix needs dimension >= 2, got {dim}")
    W = np.zeros((dim, dim))
    W[0] = 1.0 / math.sqrt(dim)
    for j in range(2, dim + 1):
        W[j - 1, : j - 1] = 1.0
        W[j - 1, j - 1] = -(j - 1)
        W[j - 1] /= math.sqrt(j * (j - 1))
    return W


def generator_matrix(D: int) -> np.ndarray:
    """Antisymmetric ``D x D`` matrix with ones above the diagonal."""
    X = np.triu(np.ones((D, D)), 1)
    return X - X.T


def _expm_antisymmetric(X: np.ndarray, alpha: float) -> np.ndarray:
    # iX is Hermitian; diagonalising it keeps exp(alpha X) orthogonal to ~1e-14
    w, V = np.linalg.eigh(1j * X)
    return ((V * np.exp(-1j * alpha * w)) @ V.conj().T).real


@dataclass(frozen=True)
class RotationMatrix:
    matrix: np.ndarray
    angle: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def rotation_matrix(alpha: float, dim: int) -> RotationMatrix:
    """Rotation about the diagonal axis: ``W_e^t blkdiag(1, exp(alpha X)) W_e``."""
    if dim < 2:
        raise InvalidSpecError(f"rotation needs dimension >= 2, got {dim}")
    if alpha == 0.0:
        return RotationMatrix(np.eye(dim), 0.0)
    W = helmert_axis_matrix(dim)
    R1 = np.eye(dim)
    R1[1:, 1:] = _expm_antisymmetric(generator_matrix(dim - 1), alpha)
    return RotationMatrix(W.T @ R1 @ W, float(alpha))


def apply_rotation(code: SphericalCode, R: RotationMatrix) -> SphericalCode:
    if R.dim != code.dim:
        raise DomainMismatchError(f"rotation of dimension {R.dim} applied to {code.dim}-dimensional code")
    pts = code.points @ R.matrix
    # re-normalize the ~1e-15 drift so downstream unit-norm checks stay tight
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return replace(code, points=pts, alpha=code.alpha + R.angle)


def hemisphere_filter(code: SphericalCode, axis: int = -1, tol: float = UNIT_TOL) -> SphericalCode:
    """Keep one point of each antipodal class: the upper hemisphere along ``axis``.

    Points with ``|p[axis]| <= tol`` lie on the equator; there a point is
    dropped only if its antipode is also present and lexicographically larger.
    """
    pts = code.points
    height = pts[:, axis]
    keep = height > tol
    equator = np.flatnonzero(np.abs(height) <= tol)
    for i in equator:
        anti = [j for j in equator if j != i and np.linalg.norm(pts[i] + pts[j]) < 1e-9]
        if not anti or all(_lex_greater(pts[i], pts[j]) for j in anti):
            keep[i] = True
    kept = np.flatnonzero(keep)
    indices = tuple(code.indices[i] for i in kept) if code.indices else tuple(int(i) for i in kept)
    return replace(code, points=pts[kept], indices=indices)


def _lex_greater(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    for x, y in zip(a, b):
        if abs(x - y) > tol:
            return x > y
    return False
