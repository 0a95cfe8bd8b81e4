"""Space-time codebooks: construction pipelines, composition and file I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import combinatorics as comb
from . import spherical as sph
from .errors import CodebookFormatError, CompositionError, DomainMismatchError, InvalidRateError, InvariantError
from .manifold import ManifoldDims, sphere_to_grassmann, sphere_to_stiefel

ORTHO_TOL = 1e-10
DISTINCT_TOL = 1e-6  # Gram-form distances bottom out near sqrt(eps)
MODES = ("coherent", "noncoherent")


def orthonormality_error(codewords: np.ndarray) -> np.ndarray:
    """``||Phi* Phi - 1||_F`` for every codeword."""
    n_t = codewords.shape[-1]
    gram = np.einsum("kti,ktj->kij", codewords.conj(), codewords)
    return np.linalg.norm(gram - np.eye(n_t), axis=(1, 2))


def cross_gram(A: np.ndarray, C: np.ndarray) -> np.ndarray:
    """All products ``A[a]* C[b]`` as an array of shape ``(len(A), len(C), n_t, n_t)``."""
    a, T, n_t = A.shape
    K = C.shape[0]
    left = A.conj().transpose(0, 2, 1).reshape(a * n_t, T)
    right = C.transpose(1, 0, 2).reshape(T, K * n_t)
    return (left @ right).reshape(a, n_t, K, n_t).transpose(0, 2, 1, 3)


def min_pairwise_distance(codewords: np.ndarray, mode: str, chunk: int = 1_000_000) -> float:
    """Smallest coherent (Frobenius) or chordal subspace distance in a codebook."""
    C = np.asarray(codewords, dtype=complex)
    K, T, n_t = C.shape
    if K < 2:
        return math.inf
    best = math.inf
    rows = max(1, chunk // (K * n_t * n_t))
    flat = C.reshape(K, -1)
    for start in range(0, K - 1, rows):
        stop = min(start + rows, K - 1)
        if mode == "coherent":
            # ||A - B||^2 = 2 n_t - 2 Re <A, B> for orthonormal columns
            d2 = 2 * n_t - 2 * (flat[start:stop].conj() @ flat.T).real
        else:
            G = cross_gram(C[start:stop], C)
            d2 = n_t - np.sum(G.real**2 + G.imag**2, axis=(2, 3))
        mask = np.arange(K)[None, :] > np.arange(start, stop)[:, None]
        best = min(best, float(np.where(mask, d2, np.inf).min()))
    return math.sqrt(max(best, 0.0))


@dataclass(frozen=True)
class SpaceTimeCode:
    """Finite set of ``T x n_t`` matrices with orthonormal columns.

    In non-coherent mode each codeword stands for the subspace it spans.
    """

    codewords: np.ndarray
    mode: str
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        C = np.asarray(self.codewords, dtype=complex)
        if C.ndim != 3 or C.shape[0] < 1:
            raise InvariantError(f"codewords must have shape (K, T, n_t), got {C.shape}")
        if self.mode not in MODES:
            raise InvariantError(f"mode must be one of {MODES}, got {self.mode!r}")
        err = orthonormality_error(C)
        if err.max() >= ORTHO_TOL:
            bad = int(np.argmax(err))
            raise InvariantError(f"codeword {bad} violates Phi* Phi = 1 by {err[bad]:.3g}")
        if min_pairwise_distance(C, self.mode) <= DISTINCT_TOL:
            raise InvariantError("codewords are not pairwise distinct")
        C.setflags(write=False)
        object.__setattr__(self, "codewords", C)

    def __len__(self) -> int:
        return self.codewords.shape[0]

    @property
    def T(self) -> int:
        return self.codewords.shape[1]

    @property
    def n_t(self) -> int:
        return self.codewords.shape[2]

    @property
    def rate(self) -> float:
        return rate(self)

    @property
    def bits(self) -> int:
        """Label width used for bit-error counting: ``ceil(log2 |C|)``."""
        return max(1, math.ceil(math.log2(len(self)))) if len(self) > 1 else 1


def rate(code: SpaceTimeCode) -> float:
    """``log2 |C| / T`` in bits per channel use."""
    return math.log2(len(code)) / code.T


@dataclass(frozen=True)
class InnerCode:
    matrices: np.ndarray
    label: str

    def __post_init__(self):
        M = np.asarray(self.matrices, dtype=complex)
        if M.ndim != 3 or M.shape[1] != M.shape[2]:
            raise InvariantError("inner code matrices must be square")
        if orthonormality_error(M).max() >= 1e-12:
            raise InvariantError("inner code matrices must be unitary")
        object.__setattr__(self, "matrices", M)

    def __len__(self) -> int:
        return self.matrices.shape[0]

    def as_code(self) -> SpaceTimeCode:
        return SpaceTimeCode(self.matrices, "coherent", {"kind": "inner", "label": self.label})


CONSTELLATIONS = {
    "bpsk": np.array([1, -1], dtype=complex),
    "qpsk": np.array([1, 1j, -1, -1j], dtype=complex),
}


def alamouti_code(constellation: str = "qpsk") -> InnerCode:
    """All ``(1/sqrt 2) [[s1, s2], [-s2*, s1*]]`` over a unit-modulus constellation."""
    try:
        points = CONSTELLATIONS[constellation.lower()]
    except KeyError:
        raise ValueError(f"unknown constellation {constellation!r}") from None
    mats = [np.array([[s1, s2], [-np.conj(s2), np.conj(s1)]]) / math.sqrt(2)
            for s1 in points for s2 in points]
    return InnerCode(np.array(mats), f"alamouti-{constellation.lower()}")


def identity_inner(n_t: int) -> InnerCode:
    return InnerCode(np.eye(n_t, dtype=complex)[None], "identity")


def spherical_pipeline(values: Sequence[float], multiplicities: Sequence[int], N: int,
                       alpha: float) -> sph.SphericalCode:
    """Gray-ordered permutations -> every floor(M/N)-th -> spherical code -> rotation."""
    x = sph.build_initial_vector(values, multiplicities)
    perms = comb.gen_gray_order(x.spec)
    chosen = comb.select_evenly(perms, N)
    stride = len(perms) // N
    code = sph.spherical_code_from_perms(x, chosen, indices=[i * stride for i in range(N)])
    return sph.apply_rotation(code, sph.rotation_matrix(alpha, x.dim))


def _provenance(values, multiplicities, N, alpha, scale, n_t, T, sphere_size):
    return {
        "values": ",".join(repr(float(v)) for v in values),
        "multiplicities": ",".join(str(int(m)) for m in multiplicities),
        "N": int(N),
        "alpha": float(alpha),
        "scale": float(scale),
        "n_t": int(n_t),
        "T": int(T),
        "spherical_size": int(sphere_size),
    }


def build_noncoherent_code(values: Sequence[float], multiplicities: Sequence[int], N: int,
                           alpha: float = sph.ALPHA_NONCOHERENT, n_t: int = 2, T: int = 4,
                           scale: float = 1.0) -> SpaceTimeCode:
    """Permutation code -> rotation -> hemisphere filter -> Grassmann map."""
    dims = ManifoldDims.grassmann(n_t, T)
    if sum(multiplicities) != dims.D + 1:
        raise DomainMismatchError(f"initial vector has dimension {sum(multiplicities)}, "
                                  f"G({n_t},{T}) needs {dims.D + 1}")
    rotated = spherical_pipeline(values, multiplicities, N, alpha)
    upper = sph.hemisphere_filter(rotated)
    if len(upper) < 2:
        raise InvalidRateError(f"only {len(upper)} codeword(s) left after hemisphere filtering")
    words = np.array([sphere_to_grassmann(p, dims, scale) for p in upper.points])
    prov = _provenance(values, multiplicities, N, alpha, scale, n_t, T, len(rotated))
    prov["construction"] = "grassmann"
    return SpaceTimeCode(words, "noncoherent", prov)


def build_coherent_from_sphere(values: Sequence[float], multiplicities: Sequence[int], N: int,
                               alpha: float = sph.ALPHA_COHERENT, n_t: int = 2, T: int = 4,
                               scale: float = 1.0) -> SpaceTimeCode:
    """Permutation code -> rotation -> Stiefel map (no hemisphere identification)."""
    dims = ManifoldDims.stiefel(n_t, T)
    if sum(multiplicities) != dims.D + 1:
        raise DomainMismatchError(f"initial vector has dimension {sum(multiplicities)}, "
                                  f"V({n_t},{T}) needs {dims.D + 1}")
    rotated = spherical_pipeline(values, multiplicities, N, alpha)
    words = np.array([sphere_to_stiefel(p, dims, scale) for p in rotated.points])
    prov = _provenance(values, multiplicities, N, alpha, scale, n_t, T, len(rotated))
    prov["construction"] = "stiefel"
    return SpaceTimeCode(words, "coherent", prov)


def compose(nc: SpaceTimeCode, inner: InnerCode) -> SpaceTimeCode:
    """Coherent code ``{Phi u}``, outer index major, inner index minor."""
    if inner.matrices.shape[1] != nc.n_t:
        raise DomainMismatchError(f"inner code is {inner.matrices.shape[1]}x{inner.matrices.shape[1]}, "
                                  f"outer code has n_t={nc.n_t}")
    words = np.einsum("kti,lij->kltj", nc.codewords, inner.matrices).reshape(-1, nc.T, nc.n_t)
    if min_pairwise_distance(words, "coherent") <= DISTINCT_TOL:
        raise CompositionError("composition produced coinciding codewords")
    prov = {f"outer.{k}": v for k, v in nc.provenance.items()}
    prov["construction"] = "composed"
    prov["inner"] = inner.label
    return SpaceTimeCode(words, "coherent", prov)


# --- presets ----------------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    name: str
    values: tuple[float, ...] = ()
    multiplicities: tuple[int, ...] = ()
    N: int = 0
    T: int = 0
    n_t: int = 2
    alpha: float = sph.ALPHA_NONCOHERENT
    inner: str | None = None  # compose with an Alamouti code of this constellation
    description: str = ""

    def build(self, alpha: float | None = None, scale: float = 1.0) -> SpaceTimeCode:
        if not self.multiplicities:
            return alamouti_code(self.inner).as_code()
        a = self.alpha if alpha is None else alpha
        code = build_noncoherent_code(self.values, self.multiplicities, self.N, a, self.n_t, self.T, scale)
        code.provenance["preset"] = self.name
        if self.inner is not None:
            code = compose(code, alamouti_code(self.inner))
            code.provenance["preset"] = self.name
        return code


PRESETS = {p.name: p for p in [
    Preset("nc-T4", (0, 1), (7, 2), 32, 4, description="non-coherent 4x2, x=(0^7,1^2)/sqrt2, N=32"),
    Preset("nc-T8", (-1, 0, 1), (1, 23, 1), 512, 8, description="non-coherent 8x2, x=(-1,0^23,1)/sqrt2, N=512"),
    Preset("nc-T12", (0, 1), (38, 3), 8192, 12, description="non-coherent 12x2, x=(0^38,1^3)/sqrt3, N=8192"),
    Preset("nc-T8-r05", (-1, 0, 1), (1, 23, 1), sph.required_perm_count(0.5, 8, 24), 8,
           description="non-coherent 8x2 at nominal rate 1/2, x=(-1,0^23,1)/sqrt2, N=16"),
    Preset("coh-T4", (0, 1), (8, 1), 8, 4, inner="qpsk", description="(0^8,1), N=8, composed with QPSK Alamouti"),
    Preset("coh-T8", (0, 1), (23, 2), 32, 8, inner="qpsk",
           description="(0^23,1^2)/sqrt2, N=32, composed with QPSK Alamouti"),
    Preset("coh-T16", (0, 1), (55, 2), 512, 16, inner="qpsk",
           description="(0^55,1^2)/sqrt2, N=512, composed with QPSK Alamouti"),
    Preset("alamouti-bpsk", inner="bpsk", description="2x2 Alamouti, BPSK"),
    Preset("alamouti-qpsk", inner="qpsk", description="2x2 Alamouti, QPSK"),
]}


def build_preset(name: str, alpha: float | None = None, scale: float = 1.0) -> SpaceTimeCode:
    try:
        preset = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return preset.build(alpha=alpha, scale=scale)


# --- file format --------------------------------------------------------------

_HEADER_KEYS = ("mode", "T", "nt", "cardinality", "rate")


def save_code(code: SpaceTimeCode, path) -> None:
    """Write a codebook as text: ``key = value`` header, then one block per codeword."""
    lines = [
        "# space-time codebook",
        f"mode = {code.mode}",
        f"T = {code.T}",
        f"nt = {code.n_t}",
        f"cardinality = {len(code)}",
        f"rate = {code.rate:.17g}",
    ]
    for key, value in sorted(code.provenance.items()):
        lines.append(f"provenance.{key} = {value}")
    for k, word in enumerate(code.codewords):
        lines.append(f"codeword {k}")
        for row in word:
            lines.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def load_code(path) -> SpaceTimeCode:
    """Read a codebook written by :func:`save_code`; all invariants are re-checked."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    header, prov = {}, {}
    pos = 0
    while pos < len(lines) and not lines[pos].startswith("codeword"):
        key, sep, value = lines[pos].partition("=")
        if not sep:
            raise CodebookFormatError(f"malformed header line {lines[pos]!r}")
        key, value = key.strip(), value.strip()
        if key.startswith("provenance."):
            prov[key[len("provenance."):]] = _parse_value(value)
        else:
            header[key] = value
        pos += 1
    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise CodebookFormatError(f"missing header keys: {missing}")
    try:
        T, n_t, K = int(header["T"]), int(header["nt"]), int(header["cardinality"])
    except ValueError as exc:
        raise CodebookFormatError(str(exc)) from None
    words = np.empty((K, T, n_t), dtype=complex)
    for k in range(K):
        if pos >= len(lines) or lines[pos] != f"codeword {k}":
            raise CodebookFormatError(f"expected 'codeword {k}', file truncated or malformed")
        pos += 1
        for t in range(T):
            if pos >= len(lines):
                raise CodebookFormatError(f"codeword {k} truncated at row {t}")
            entries = lines[pos].split()
            if len(entries) != n_t:
                raise CodebookFormatError(f"codeword {k} row {t}: expected {n_t} entries")
            try:
                for i, entry in enumerate(entries):
                    re, im = entry.split(",")
                    words[k, t, i] = complex(float(re), float(im))
            except ValueError:
                raise CodebookFormatError(f"codeword {k} row {t}: bad number") from None
            pos += 1
    if pos >= len(lines) or lines[pos] != "end":
        raise CodebookFormatError("missing 'end' marker; file truncated")
    code = SpaceTimeCode(words, header["mode"], prov)
    if not math.isclose(code.rate, float(header["rate"]), rel_tol=1e-12, abs_tol=1e-15):
        raise CodebookFormatError("rate in header disagrees with cardinality")
    return code
