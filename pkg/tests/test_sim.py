import math

import numpy as np
import pytest

from permstc.codes import SpaceTimeCode, alamouti_code, build_preset
from permstc.errors import DomainMismatchError, InvalidSpecError
from permstc.sim import (
    CSV_COLUMNS,
    ChannelRealization,
    SimConfig,
    decode_coherent,
    decode_noncoherent,
    draw_trials,
    ml_coherent,
    ml_noncoherent,
    point_key,
    run_ber,
    transmit,
    wilson_interval,
    words_per_trial,
)

rng = np.random.default_rng(3)


def cn(*shape):
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / math.sqrt(2)


@pytest.fixture(scope="module")
def nc_t4():
    return build_preset("nc-T4")


def test_transmit_trivial():
    Phi = alamouti_code("qpsk").matrices[3]
    zero = ChannelRealization(np.eye(2), np.zeros((2, 2)))
    np.testing.assert_allclose(transmit(Phi, 4.0, zero), 2.0 * Phi)
    N = cn(2, 2)
    np.testing.assert_array_equal(transmit(Phi, 0.0, ChannelRealization(cn(2, 2), N)), N)
    with pytest.raises(DomainMismatchError):
        transmit(Phi, 1.0, ChannelRealization(cn(3, 1), cn(2, 1)))


def test_noiseless_decoding(nc_t4):
    C = nc_t4.codewords
    H = np.array([[1.0 + 0.5j], [-0.3 + 0.8j]])
    for j in range(len(C)):
        Y = transmit(C[j], 10.0, ChannelRealization(H, np.zeros((4, 1))))
        assert ml_noncoherent(Y, nc_t4) == j
        assert ml_coherent(Y, H, nc_t4, 10.0) == j


def test_noncoherent_metric_unitary_invariance(nc_t4):
    C = nc_t4.codewords
    u = alamouti_code("qpsk").matrices[5]
    Y = cn(4, 1)
    m1 = np.sum(np.abs(np.swapaxes(C.conj(), 1, 2) @ Y) ** 2, axis=(1, 2))
    m2 = np.sum(np.abs(np.swapaxes((C @ u).conj(), 1, 2) @ Y) ** 2, axis=(1, 2))
    np.testing.assert_allclose(m1, m2, atol=1e-10)
    assert ml_noncoherent(Y, C) == ml_noncoherent(Y, C @ u)


def exhaustive_coherent(Y, H, C, rho):
    c = math.sqrt(rho * C.shape[1] / C.shape[2])
    best, arg = math.inf, -1
    for k, Phi in enumerate(C):
        m = sum(abs(z) ** 2 for z in (Y - c * Phi @ H).ravel())
        if m < best:
            best, arg = m, k
    return arg


def exhaustive_noncoherent(Y, C):
    best, arg = -math.inf, -1
    for k, Phi in enumerate(C):
        m = sum(abs(z) ** 2 for z in (Y.conj().T @ Phi).ravel())
        if m > best:
            best, arg = m, k
    return arg


@pytest.mark.parametrize("n_r", [1, 2])
def test_batched_decoders_match_oracle(n_r):
    C = build_preset("nc-T4").codewords[:16]
    rho = 3.0
    B = 300
    idx = rng.integers(0, 16, size=B)
    H = cn(B, 2, n_r)
    Y = math.sqrt(rho * 2) * (C[idx] @ H) + cn(B, 4, n_r)
    coh = decode_coherent(Y, H, C)
    non = decode_noncoherent(Y, C)
    for b in range(B):
        assert coh[b] == exhaustive_coherent(Y[b], H[b], C, rho) == ml_coherent(Y[b], H[b], C, rho)
        assert non[b] == exhaustive_noncoherent(Y[b], C) == ml_noncoherent(Y[b], C)


def test_decoder_ties_take_smallest_index():
    C = alamouti_code("bpsk").matrices
    Y = np.zeros((2, 1), complex)
    assert ml_noncoherent(Y, C) == 0
    assert decode_noncoherent(Y[None], C)[0] == 0


def test_noise_statistics():
    key = point_key(99, 0)
    _, H, N = draw_trials(key, 0, 50_000, 4, 8, 2, 1)
    z = np.concatenate([H.ravel(), N.ravel()])
    assert z.size == 500_000
    for part in (z.real, z.imag):
        assert abs(part.mean()) < 0.01 * math.sqrt(0.5) * 3
        assert abs(part.var() - 0.5) < 0.005
    assert abs(np.mean(z.real * z.imag)) < 0.005


def test_codeword_indices_uniform():
    idx, _, _ = draw_trials(point_key(1, 0), 0, 21_000, 21, 4, 2, 1)
    counts = np.bincount(idx, minlength=21)
    chi2 = float(np.sum((counts - 1000) ** 2 / 1000))
    assert chi2 < 60  # 20 degrees of freedom


def test_draws_are_partition_independent():
    key = point_key(5, 2)
    whole = draw_trials(key, 0, 100, 16, 4, 2, 1)
    a = draw_trials(key, 0, 37, 16, 4, 2, 1)
    b = draw_trials(key, 37, 63, 16, 4, 2, 1)
    for full, x, y in zip(whole, a, b):
        np.testing.assert_array_equal(full, np.concatenate([x, y]))
    assert words_per_trial(4, 2, 1) % 4 == 0


def test_point_keys_differ():
    assert not np.array_equal(point_key(1, 0), point_key(1, 1))
    assert not np.array_equal(point_key(1, 0), point_key(2, 0))


def test_wilson_interval():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0.0 and hi == pytest.approx(0.27753, abs=1e-5)
    lo, hi = wilson_interval(50, 100)
    assert (lo, hi) == pytest.approx((0.40383, 0.59617), abs=1e-5)


def test_high_snr_is_error_free(nc_t4):
    curve = run_ber(SimConfig(nc_t4, [60.0], 1000, master_seed=1))
    assert curve.points[0].bit_errors == 0 and curve.points[0].ber == 0


def test_high_snr_small_code_coherent():
    code = alamouti_code("bpsk").as_code()
    curve = run_ber(SimConfig(code, [40.0], 10_000, master_seed=2))
    assert curve.points[0].symbol_errors == 0


def test_counting_consistency(nc_t4):
    curve = run_ber(SimConfig(nc_t4, [0.0, 6.0], 3000, master_seed=4))
    for p in curve.points:
        assert 0 <= p.ber <= 1 and 0 <= p.ser <= 1
        assert p.bit_errors <= p.trials * p.bits
        assert p.ser >= p.ber - 1e-15
        assert p.symbol_errors <= p.bit_errors
        lo, hi = p.ber_interval
        assert lo <= p.ber <= hi


def test_determinism_and_workers(nc_t4):
    base = SimConfig(nc_t4, [4.0, 8.0], 5000, master_seed=123)
    a = run_ber(base)
    b = run_ber(SimConfig(nc_t4, [4.0, 8.0], 5000, master_seed=123, workers=3, chunk_trials=777))
    assert a.to_csv() == b.to_csv()
    c = run_ber(SimConfig(nc_t4, [4.0, 8.0], 5000, master_seed=124))
    assert a.to_csv() != c.to_csv()


def test_csv_layout(nc_t4, tmp_path):
    curve = run_ber(SimConfig(nc_t4, [2.5], 200, master_seed=0))
    text = curve.to_csv()
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    fields = lines[1].split(",")
    assert fields[0] == "2.5" and fields[1] == "200"
    curve.write(tmp_path / "out.csv")
    meta = (tmp_path / "out.csv.meta").read_text()
    assert "rng = philox4x64-10" in meta and "master_seed = 0" in meta


def test_config_validation(nc_t4):
    with pytest.raises(InvalidSpecError):
        SimConfig(nc_t4, [], 10)
    with pytest.raises(InvalidSpecError):
        SimConfig(nc_t4, [1.0], 0)
    with pytest.raises(InvalidSpecError):
        SimConfig(nc_t4, [1.0], 10, master_seed=2**64)
    with pytest.raises(InvalidSpecError):
        SimConfig(nc_t4, [1.0], 10, mode="differential")


def test_config_loads_code_file(tmp_path, nc_t4):
    from permstc.codes import save_code

    save_code(nc_t4, tmp_path / "c.txt")
    a = run_ber(SimConfig(tmp_path / "c.txt", [5.0], 500, master_seed=9))
    b = run_ber(SimConfig(nc_t4, [5.0], 500, master_seed=9))
    assert a.to_csv() == b.to_csv()
