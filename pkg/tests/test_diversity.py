import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permstc.codes import alamouti_code, build_preset
from permstc.diversity import (
    code_report,
    coherent_pair_report,
    effective_snr_coherent,
    effective_snr_noncoherent,
    noncoherent_pair_report,
    noncoherent_product_det,
    sym_polys,
)
from permstc.errors import DomainMismatchError, InvariantError
from permstc.manifold import coherent_distance, noncoherent_distance

rng = np.random.default_rng(11)


def random_frame(T, n_t, rng=rng):
    Z = rng.normal(size=(T, n_t)) + 1j * rng.normal(size=(T, n_t))
    return np.linalg.qr(Z)[0]


def brute_sym_polys(x):
    return [sum(math.prod(c) for c in itertools.combinations(x, k)) for k in range(len(x) + 1)]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 4, allow_nan=False), min_size=0, max_size=6))
def test_sym_polys_brute_force(x):
    np.testing.assert_allclose(sym_polys(x), brute_sym_polys(x), rtol=1e-12, atol=1e-12)


def test_sym_polys_small():
    np.testing.assert_allclose(sym_polys([1, 2, 3]), [1, 6, 11, 6])
    np.testing.assert_allclose(sym_polys([]), [1])


def test_effective_snr():
    assert effective_snr_coherent(8.0, 4, 2) == 4.0
    assert effective_snr_noncoherent(0.25) == pytest.approx(0.125)


def test_coherent_report_identities():
    for _ in range(200):
        P, Q = random_frame(6, 2), random_frame(6, 2)
        rep = coherent_pair_report(P, Q, 3.0)
        assert abs(rep.diversity_sum - coherent_distance(P, Q) ** 2) < 1e-10
        d = P - Q
        assert abs(rep.diversity_product - np.linalg.det(d.conj().T @ d).real) < 1e-10
        assert rep.diversity == pytest.approx(np.polynomial.polynomial.polyval(3.0, rep.s), rel=1e-9)


def test_noncoherent_report_identities():
    for _ in range(200):
        P, Q = random_frame(6, 2), random_frame(6, 2)
        rep = noncoherent_pair_report(P, Q, 2.0)
        assert abs(rep.diversity_sum - noncoherent_distance(P, Q) ** 2) < 1e-10
        assert abs(rep.diversity_product - noncoherent_product_det(P, Q)) < 1e-9


def test_noncoherent_report_rejects_non_orthonormal():
    P = random_frame(4, 2)
    with pytest.raises(InvariantError):
        noncoherent_pair_report(2 * P, P, 1.0)
    with pytest.raises(DomainMismatchError):
        noncoherent_pair_report(P, random_frame(5, 2), 1.0)


def test_chernov_bound():
    P, Q = random_frame(4, 2), random_frame(4, 2)
    rep = coherent_pair_report(P, Q, 1.0, n_r=2)
    assert rep.chernov == pytest.approx(0.5 * rep.diversity**-2)


def brute_code_report(C, rho, mode):
    best = {}
    for i, j in itertools.combinations(range(len(C)), 2):
        rep = (coherent_pair_report if mode == "coherent" else noncoherent_pair_report)(C[i], C[j], rho)
        for key, val in (("sum", rep.diversity_sum), ("prod", rep.diversity_product), ("div", rep.diversity)):
            if key not in best or val < best[key][0] - 1e-13:
                best[key] = (val, (i, j))
    return best


@pytest.mark.parametrize("mode", ["coherent", "noncoherent"])
def test_code_report_matches_pairwise(mode):
    C = np.array([random_frame(4, 2) for _ in range(12)])
    rep = code_report(C, 2.5, mode, chunk_pairs=30)
    best = brute_code_report(C, 2.5, mode)
    assert rep.min_diversity_sum == pytest.approx(best["sum"][0], abs=1e-10)
    assert rep.min_diversity_product == pytest.approx(best["prod"][0], abs=1e-10)
    assert rep.min_diversity == pytest.approx(best["div"][0], rel=1e-10)
    assert rep.argmin_sum == best["sum"][1]


def test_alamouti_full_diversity():
    rep = code_report(alamouti_code("bpsk").matrices, 1.0, "coherent")
    assert rep.full_diversity
    assert rep.min_diversity_sum == pytest.approx(4.0)
    assert rep.min_diversity_product == pytest.approx(4.0)


def test_noncoherent_presets_full_diversity():
    for name in ["nc-T4", "nc-T8"]:
        assert code_report(build_preset(name).codewords, 1.0).full_diversity
