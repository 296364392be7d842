import numpy as np
import pytest

from bicmb.demux import build_location_table, rotating_demux
from bicmb.errors import ConfigInvalid, NoConvergence, TableMismatch
from bicmb.sim import (Constellation, SimConfig, _jacobi_eigvalsh, bit_metric, build_link,
                       coded_bit_metrics, draw_channels, encode_batch, exhaustive_decode, modulate,
                       run_ber, simulate_batch, singular_values, symbol_bit_metrics, viterbi_decode)
from bicmb.trellis import encode

from conftest import code


def test_jacobi_matches_lapack():
    rng = np.random.default_rng(0)
    H = draw_channels(4, 4, 200, rng)
    G = np.conj(np.swapaxes(H, -1, -2)) @ H
    ours = np.sort(_jacobi_eigvalsh(G), axis=-1)
    np.testing.assert_allclose(ours, np.linalg.eigvalsh(G), rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(np.prod(ours, axis=-1), np.linalg.det(G).real, rtol=1e-9)


def test_jacobi_reports_non_convergence():
    A = np.array([[1.0, 0.5], [0.5, 2.0]])
    with pytest.raises(NoConvergence):
        _jacobi_eigvalsh(A, tol=0.0, max_sweeps=0)


def test_singular_values_rectangular_and_ordered():
    rng = np.random.default_rng(1)
    for M, N in ((3, 2), (2, 3), (4, 4)):
        H = draw_channels(M, N, 50, rng)
        sv = singular_values(H)
        assert sv.shape == (50, min(M, N))
        assert np.all(np.diff(sv, axis=1) <= 1e-12)
        np.testing.assert_allclose(sv, np.linalg.svd(H, compute_uv=False), rtol=1e-9)


@pytest.mark.parametrize("m", [1, 2, 4, 6])
def test_constellation_energy_and_gray(m):
    c = Constellation.qam(m)
    assert c.points.size == 1 << m
    assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0)
    if m > 1:
        # Gray labelling: nearest neighbours differ in exactly one bit
        for a in range(c.points.size):
            d = np.abs(c.points - c.points[a])
            for b in np.flatnonzero(np.isclose(d, c.d_min)):
                assert bin(a ^ b).count("1") == 1


def test_qam_rejects_odd_m():
    with pytest.raises(ConfigInvalid):
        Constellation.qam(3)


def test_hard_demap_inverts_labels():
    c = Constellation.qam(4)
    bits = (np.arange(16)[:, None] >> np.arange(3, -1, -1)) & 1
    assert np.array_equal(c.hard_demap(c.points[c.labels_of(bits)]), bits)


def test_bit_metrics_agree_with_scalar_form():
    c = Constellation.qam(4)
    rng = np.random.default_rng(2)
    r = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    lam = np.array([1.7, 0.4])
    sm = symbol_bit_metrics(r, lam, c)
    for k in range(3):
        for s in range(2):
            for i in range(4):
                for b in (0, 1):
                    assert sm[k, s, i, b] == pytest.approx(bit_metric(r[k, s], lam[s], c, i, b))


def test_modulate_checks_table():
    t = build_location_table(rotating_demux(2, 2), None, 2, 4)
    with pytest.raises(TableMismatch):
        modulate(np.zeros(16, dtype=int), Constellation.qam(4), t)
    with pytest.raises(TableMismatch):
        modulate(np.zeros(15, dtype=int), Constellation.qam(2), t)


def test_encode_batch_matches_scalar_encoder():
    tr, pu = code("133,171", "3/4")
    rng = np.random.default_rng(3)
    info = rng.integers(0, 2, (5, 30))
    batch = encode_batch(tr, info, pu, terminate=True)
    for row, bits in zip(info, batch):
        assert np.array_equal(encode(tr, row, pu, terminate=True), bits)


def _noiseless_metrics(coded, const_points=np.array([1.0, -1.0])):
    # BPSK-style distances: metric of the sent bit is 0, of the other is 4
    coded = np.asarray(coded)
    return np.stack([4.0 * (coded == 1), 4.0 * (coded == 0)], axis=-1)


@pytest.mark.parametrize("gens,pu", [("5,7", None), ("133,171", None), ("133,171", "2/3"),
                                     ("133,171", "3/4"), ("133,145,175", None)])
def test_zero_noise_decode(gens, pu):
    tr, p = code(gens, pu)
    rng = np.random.default_rng(4)
    info = rng.integers(0, 2, (4, 60)).astype(np.uint8)
    cw = encode_batch(tr, info, p, terminate=True)
    dec = viterbi_decode(_noiseless_metrics(cw), tr, p, sections=60 + tr.memory)
    assert np.array_equal(dec, info)


@pytest.mark.parametrize("gens,pu", [("5,7", None), ("133,171", None), ("133,171", "3/4")])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_viterbi_equals_exhaustive_search(gens, pu, seed):
    tr, p = code(gens, pu)
    rng = np.random.default_rng(seed)
    for n_info in (1, 5, 9, 12):
        info = rng.integers(0, 2, n_info).astype(np.uint8)
        cw = encode_batch(tr, info[None], p, terminate=True)[0]
        metrics = _noiseless_metrics(cw) + rng.normal(0, 3.0, (cw.size, 2))
        v = viterbi_decode(metrics, tr, p, sections=n_info + tr.memory)
        assert np.array_equal(v, exhaustive_decode(metrics, tr, n_info, p))


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        SimConfig(S=3, M=2, N=2).validate()
    with pytest.raises(ConfigInvalid):
        build_link(SimConfig(generators="133,171", puncture="3/4", M=3, N=3, S=3, L=5, m=2))


def test_batches_are_deterministic():
    link = build_link(SimConfig(L=64, snr_db=[5.0], batch_packets=8, seed=3))
    assert np.array_equal(simulate_batch(link, 0, 2), simulate_batch(link, 0, 2))


def test_result_independent_of_worker_count():
    cfg = SimConfig(L=64, snr_db=[4.0, 8.0], batch_packets=8, max_packets=48, target_bit_errors=30,
                    seed=5)
    a = run_ber(cfg, workers=1)
    b = run_ber(cfg, workers=2)
    assert np.array_equal(a.bit_errors, b.bit_errors)
    assert np.array_equal(a.bits, b.bits)


def test_full_chain_agrees_with_reduced_chain():
    base = dict(L=64, snr_db=[6.0], batch_packets=32, max_packets=1600, min_packets=1600,
                target_bit_errors=1, seed=8)
    red = run_ber(SimConfig(chain="reduced", **base))
    full = run_ber(SimConfig(chain="full", **base))
    gap = abs(red.ber[0] - full.ber[0])
    assert gap < 3 * np.hypot(red.stderr[0], full.stderr[0])


def test_ber_falls_with_snr():
    cfg = SimConfig(L=128, snr_db=[0.0, 10.0], batch_packets=32, max_packets=320, seed=2,
                    target_bit_errors=200)
    c = run_ber(cfg)
    assert c.ber[0] > c.ber[1]
    header = c.to_csv().splitlines()
    assert header[1] == "snr_db,ber,bit_errors,bits_simulated,stderr"
