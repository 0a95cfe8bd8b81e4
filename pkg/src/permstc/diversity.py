"""Diversity functionals, diversity sum/product and Chernov bounds.

For a coherent pair the difference is ``Delta = Phi - Psi`` and the
functional is ``prod_i (1 + rho_eff sigma_i^2(Delta))``; for a non-coherent
pair the correlation ``Phi* Psi`` enters through ``1 - sigma_i^2``.  Both
functionals are also evaluated as polynomials in the effective SNR whose
coefficients are elementary symmetric polynomials of the spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import cross_gram
from .errors import DomainMismatchError, InvariantError

FULL_DIVERSITY_THRESHOLD = 1e-12
SIGMA_TOL = 1e-8


def effective_snr_coherent(rho: float, T: int, n_t: int) -> float:
    return rho * T / (4.0 * n_t)


def effective_snr_noncoherent(rho_eff: float) -> float:
    return rho_eff**2 / (rho_eff + 0.25)


def sym_polys(x) -> np.ndarray:
    """Elementary symmetric polynomials ``(e_0, ..., e_n)`` of ``x``.

    Coefficients of ``prod_i (1 + t x_i)``, accumulated one factor at a time.
    """
    x = np.asarray(x, dtype=float).ravel()
    e = np.zeros(x.size + 1)
    e[0] = 1.0
    for i, xi in enumerate(x, start=1):
        e[1:i + 1] = e[1:i + 1] + xi * e[0:i]
    return e


@dataclass(frozen=True)
class DiversityReport:
    spectrum: np.ndarray  # singular values of the difference symbol, descending
    s: np.ndarray  # elementary symmetric values s_0..s_{n_t}
    diversity: float
    effective_snr: float
    n_r: int = 1

    @property
    def diversity_sum(self) -> float:
        return float(self.s[1])

    @property
    def diversity_product(self) -> float:
        return float(self.s[-1])

    @property
    def chernov(self) -> float:
        return 0.5 * self.diversity ** (-self.n_r)


def _functional(x: np.ndarray, rho_eff: float) -> tuple[np.ndarray, float]:
    s = sym_polys(x)
    poly = float(np.polynomial.polynomial.polyval(rho_eff, s))
    prod = float(np.prod(1.0 + rho_eff * x))
    if abs(poly - prod) > 1e-9 * max(abs(prod), 1.0):
        raise InvariantError(f"product form {prod} and polynomial form {poly} disagree")
    return s, prod


def _pair(Phi, Psi):
    Phi, Psi = np.asarray(Phi, dtype=complex), np.asarray(Psi, dtype=complex)
    if Phi.shape != Psi.shape:
        raise DomainMismatchError(f"shape mismatch {Phi.shape} vs {Psi.shape}")
    return Phi, Psi


def coherent_pair_report(Phi, Psi, rho_eff: float, n_r: int = 1) -> DiversityReport:
    Phi, Psi = _pair(Phi, Psi)
    sigma = np.linalg.svd(Phi - Psi, compute_uv=False)[: Phi.shape[1]]
    sigma = np.pad(sigma, (0, Phi.shape[1] - sigma.size))
    s, div = _functional(sigma**2, rho_eff)
    return DiversityReport(sigma, s, div, rho_eff, n_r)


def noncoherent_pair_report(Phi, Psi, rho_eff_nc: float, n_r: int = 1) -> DiversityReport:
    """Report for the subspaces ``<Phi>``, ``<Psi>`` at non-coherent effective SNR."""
    Phi, Psi = _pair(Phi, Psi)
    sigma = np.linalg.svd(Phi.conj().T @ Psi, compute_uv=False)
    if sigma.max(initial=0.0) > 1.0 + SIGMA_TOL:
        raise InvariantError(f"singular value {sigma.max()} > 1: representatives are not orthonormal")
    sigma = np.clip(sigma, 0.0, 1.0)
    s, div = _functional(1.0 - sigma**2, rho_eff_nc)
    return DiversityReport(sigma, s, div, rho_eff_nc, n_r)


def noncoherent_product_det(Phi, Psi) -> float:
    """``det(1 - Delta* Delta)`` with ``Delta = Phi* Psi``."""
    Phi, Psi = _pair(Phi, Psi)
    G = Phi.conj().T @ Psi
    return float(np.linalg.det(np.eye(G.shape[1]) - G.conj().T @ G).real)


@dataclass(frozen=True)
class CodeReport:
    cardinality: int
    mode: str
    effective_snr: float
    min_diversity_sum: float
    argmin_sum: tuple[int, int]
    min_diversity_product: float
    argmin_product: tuple[int, int]
    min_diversity: float
    argmin_diversity: tuple[int, int]

    @property
    def full_diversity(self) -> bool:
        return self.min_diversity_product > FULL_DIVERSITY_THRESHOLD


def pair_spectra(codewords: np.ndarray, rows: slice, mode: str) -> np.ndarray:
    """Spectrum entering the functional for pairs ``(i, j)``, ``i`` in ``rows``.

    Returns an array of shape ``(len(rows), K, n_t)``: ``sigma_i^2(Phi - Psi)``
    in coherent mode, ``1 - sigma_i^2(Phi* Psi)`` in non-coherent mode.
    """
    C = codewords
    n_t = C.shape[-1]
    A = C[rows]
    if mode == "coherent":
        diff = A[:, None] - C[None, :]
        gram = diff.conj().swapaxes(-1, -2) @ diff
        x = np.linalg.eigvalsh(gram)
    else:
        G = cross_gram(A, C)
        gram = np.eye(n_t) - G.conj().swapaxes(-1, -2) @ G
        x = np.linalg.eigvalsh(gram)
    return np.clip(x, 0.0, None)


def code_report(codewords: np.ndarray, rho_eff: float, mode: str = "noncoherent",
                chunk_pairs: int = 250_000) -> CodeReport:
    """Exhaustive pairwise minima of diversity sum, product and functional.

    ``rho_eff`` is the effective SNR of the requested mode (use
    :func:`effective_snr_noncoherent` for non-coherent codes).  Ties resolve to
    the lexicographically smallest index pair.
    """
    C = np.asarray(codewords, dtype=complex)
    K = C.shape[0]
    if K < 2:
        raise ValueError("code report needs at least two codewords")
    if mode not in ("coherent", "noncoherent"):
        raise ValueError(f"unknown mode {mode!r}")
    rows_per_chunk = max(1, chunk_pairs // K)
    best = {"sum": (np.inf, None), "prod": (np.inf, None), "div": (np.inf, None)}
    for start in range(0, K - 1, rows_per_chunk):
        stop = min(start + rows_per_chunk, K - 1)
        x = pair_spectra(C, slice(start, stop), mode)
        ii, jj = np.meshgrid(np.arange(start, stop), np.arange(K), indexing="ij")
        upper = jj > ii
        vals = {
            "sum": x.sum(-1),
            "prod": x.prod(-1),
            "div": np.prod(1.0 + rho_eff * x, axis=-1),
        }
        for key, v in vals.items():
            v = np.where(upper, v, np.inf)
            flat = int(np.argmin(v))
            if v.flat[flat] < best[key][0]:
                best[key] = (float(v.flat[flat]), (int(ii.flat[flat]), int(jj.flat[flat])))
    return CodeReport(
        cardinality=K,
        mode=mode,
        effective_snr=rho_eff,
        min_diversity_sum=best["sum"][0],
        argmin_sum=best["sum"][1],
        min_diversity_product=best["prod"][0],
        argmin_product=best["prod"][1],
        min_diversity=best["div"][0],
        argmin_diversity=best["div"][1],
    )
