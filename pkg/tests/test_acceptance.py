"""End-to-end acceptance checks for the simulator.

Each test prints a single PASS/FAIL line naming the criterion before
asserting, so a verbose run doubles as an acceptance report.  These are
deliberately heavier than the unit tests (Monte-Carlo sample sizes chosen for
statistical headroom, not speed).
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from thzisac import channel as ch
from thzisac import metrics, numerics, rxcomm, sensing, waveform

DELTA_F = 1.92e6
F_C = 0.3e12


def make_cfg(kind, m, n):
    return waveform.WaveformConfig(kind=kind, M=m, N=n, delta_f=DELTA_F,
                                   f_c=F_C, cp_len=m // 4)


def report(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    sys.stdout.flush()
    assert ok, f"{name}: {detail}"


def test_papr_separation():
    frames = 10_000
    values = {}
    runtimes = {}
    for kind in waveform.KINDS:
        cfg = make_cfg(kind, 64, 16)
        t0 = time.monotonic()
        curve = metrics.ccdf(cfg, frames, oversample=4, seed=1)
        runtimes[kind] = time.monotonic() - t0
        values[kind] = metrics.ccdf_papr_at(curve, 1e-3)
    gap = values["ofdm"] - values["dft-s-ofdm"]
    twin_sc = abs(values["dft-s-otfs"] - values["dft-s-ofdm"])
    twin_mc = abs(values["otfs"] - values["ofdm"])
    slow = max(runtimes.values())
    ok = (2.0 <= gap <= 4.0 and twin_sc <= 0.7 and twin_mc <= 0.7
          and slow < 120.0)
    report("PAPR separation at CCDF 1e-3 (1e4 frames, x4 oversampling)", ok,
           f"OFDM-vs-DFT-s-OFDM gap {gap:.2f} dB, twin gaps "
           f"{twin_sc:.2f}/{twin_mc:.2f} dB, slowest waveform {slow:.1f} s")


def test_range_accuracy():
    scenario = ch.SensingScenario(range_m=10.0, velocity_mps=20.0 / 3.6)
    trials = 200
    lines = []
    ok = True
    for kind in waveform.KINDS:
        rmse = {}
        for m, n in ((64, 16), (128, 32)):
            res = sensing.run_rmse_trials(make_cfg(kind, m, n), scenario,
                                          snr_db=30.0, trials=trials, seed=1)
            rmse[(m, n)] = res.range_rmse_m
        fine = rmse[(128, 32)]
        ok = ok and fine < 10e-3 and fine < rmse[(64, 16)]
        lines.append(f"{kind} {rmse[(64, 16)] * 1e3:.2f}->{fine * 1e3:.2f} mm")
    report("range RMSE < 10 mm at (128,32), decreasing from (64,16), "
           "200 trials at 30 dB", ok, "; ".join(lines))


def test_oracle_equivalence():
    worst_op = 0.0
    worst_ls = 0.0
    for trial in range(10):
        rng = numerics.make_rng(1000 + trial)
        kind = waveform.KINDS[trial % 4]
        cfg = make_cfg(kind, 8, 4)
        fs = cfg.sample_rate
        paths = [ch.PathSpec(rng.normal() + 1j * rng.normal(),
                             rng.uniform(0, cfg.cp_len * 0.8) / fs,
                             rng.uniform(-0.2, 0.2) * DELTA_F)
                 for _ in range(2)]
        op = rxcomm.DDChannelOperator(paths, cfg)
        a = rxcomm.dense_matrix(op)
        x = rng.normal(size=(8, 4)) + 1j * rng.normal(size=(8, 4))
        direct = op.apply(x).ravel(order="F")
        dense = a @ x.ravel(order="F")
        worst_op = max(worst_op,
                       np.max(np.abs(direct - dense)) / np.max(np.abs(dense)))
        rx = op.apply(x)
        sol = rxcomm.equalize_iterative_ls(rx, op, iters=500, tol=1e-13)
        ref = np.linalg.lstsq(a, rx.ravel(order="F"), rcond=None)[0]
        worst_ls = max(worst_ls,
                       np.max(np.abs(sol.grid.ravel(order="F") - ref))
                       / np.max(np.abs(ref)))
    ok = worst_op < 1e-9 and worst_ls < 1e-6
    report("operator matches dense probe (1e-9) and iterative LS matches "
           "dense solve (1e-6), 10 random 2-path channels at M=8 N=4", ok,
           f"worst operator err {worst_op:.2e}, worst LS err {worst_ls:.2e}")


def test_chain_identities():
    evms = {}
    parseval_err = 0.0
    adjoint_err = 0.0
    ber_total = 0.0
    for kind in waveform.KINDS:
        cfg = make_cfg(kind, 64, 16)
        nbits = waveform.bits_per_frame(cfg)
        pilots = waveform.resource_map(cfg, "none")
        frames = math.ceil(100_000 / nbits)
        worst_evm = -np.inf
        for t in range(frames):
            rng = numerics.make_rng(numerics.derive_seed(5, t))
            bits = rng.integers(0, 2, nbits, dtype=np.uint8)
            frame = waveform.modulate(bits, pilots, cfg)
            grid = waveform.demodulate(frame.samples, cfg)
            worst_evm = max(worst_evm, metrics.evm_db(frame.grid, grid))
            _, ber = rxcomm.detect_bits(grid, cfg, pilots, reference_bits=bits)
            ber_total += ber * nbits
        evms[kind] = worst_evm
        # Parseval through the CP-free chain
        cfg0 = waveform.WaveformConfig(kind=kind, M=64, N=16, delta_f=DELTA_F,
                                       f_c=F_C, cp_len=0)
        rng = numerics.make_rng(6)
        bits = rng.integers(0, 2, waveform.bits_per_frame(cfg0), dtype=np.uint8)
        f0 = waveform.modulate(bits, waveform.resource_map(cfg0, "none"), cfg0)
        e_grid = np.sum(np.abs(f0.grid) ** 2)
        e_time = np.sum(np.abs(f0.samples) ** 2)
        parseval_err = max(parseval_err, abs(e_time - e_grid) / e_grid)
        # operator adjoint identity
        op = rxcomm.DDChannelOperator(
            [ch.PathSpec(0.9 - 0.3j, 2.5 / cfg.sample_rate, 0.07 * DELTA_F)],
            cfg)
        x = rng.normal(size=(64, 16)) + 1j * rng.normal(size=(64, 16))
        y = rng.normal(size=(64, 16)) + 1j * rng.normal(size=(64, 16))
        lhs = np.vdot(y, op.apply(x))
        rhs = np.vdot(op.adjoint(y), x)
        adjoint_err = max(adjoint_err, abs(lhs - rhs) / abs(lhs))
    worst = max(evms.values())
    ok = (worst <= -100.0 and ber_total == 0 and parseval_err < 1e-9
          and adjoint_err < 1e-9)
    report("chain identities: round-trip EVM <= -100 dB, identity-channel "
           "BER 0 over 1e5 bits, Parseval/adjoint at 1e-9", ok,
           f"worst EVM {worst:.0f} dB, bit errors {ber_total:.0f}, "
           f"Parseval {parseval_err:.1e}, adjoint {adjoint_err:.1e}")


def test_impairment_calibration():
    rng = numerics.make_rng(7)
    n = 1_000_000
    x = (rng.normal(size=n) + 1j * rng.normal(size=n)) / np.sqrt(2)
    y = ch.awgn(x, 15.0, numerics.make_rng(8))
    snr_meas = 10 * np.log10(np.mean(np.abs(x) ** 2)
                             / np.mean(np.abs(y - x) ** 2))
    snr_err = abs(snr_meas - 15.0)

    fs = 64 * DELTA_F
    imp = ch.ImpairmentSpec(pn_linewidth_ref_hz=100e3)
    carrier = np.ones(n + 1, dtype=np.complex128)
    z = ch.apply_phase_noise(carrier, imp, F_C, fs, numerics.make_rng(9))
    inc = np.diff(np.unwrap(np.angle(z)))
    var_expected = 2 * np.pi * ch.effective_linewidth(imp, F_C) / fs
    var_rel = abs(np.var(inc) / var_expected - 1.0)

    quad_exact = (ch.effective_linewidth(imp, 2 * F_C)
                  == 4.0 * ch.effective_linewidth(imp, F_C))

    ok = snr_err < 0.1 and var_rel < 0.05 and quad_exact
    report("impairment calibration: AWGN 0.1 dB, phase-noise variance 5%, "
           "exact linewidth quadrupling per carrier doubling", ok,
           f"SNR error {snr_err:.3f} dB, variance error {var_rel * 100:.2f}%, "
           f"quadrupling exact: {quad_exact}")


def test_doppler_robustness():
    doppler = 11.1e3
    snr_db = 20.0
    path = ch.PathSpec(1.0, 0.0, doppler)
    bers = {}
    for kind in ("ofdm", "otfs"):
        cfg = make_cfg(kind, 64, 16)
        pilots = waveform.resource_map(cfg, "none")
        nbits = waveform.bits_per_frame(cfg)
        frames = math.ceil(1_000_000 / nbits)
        errors = 0.0
        total = 0
        for t in range(frames):
            rng = numerics.make_rng(numerics.derive_seed(11, t))
            bits = rng.integers(0, 2, nbits, dtype=np.uint8)
            frame = waveform.modulate(bits, pilots, cfg)
            spec = ch.ChannelSpec(paths=(path,), snr_db=snr_db)
            rx = ch.apply_channel(frame.samples, spec, cfg.sample_rate, rng,
                                  cp_len=cfg.cp_len)
            grid = waveform.demodulate(rx, cfg)
            if kind == "ofdm":
                gains = rxcomm.tf_channel_gains((path,), cfg)
                eq = rxcomm.equalize_onetap(grid, gains, snr_db=snr_db)
            else:
                op = rxcomm.DDChannelOperator((path,), cfg)
                eq = rxcomm.equalize_iterative_ls(
                    grid, op, ridge=10.0 ** (-snr_db / 10.0)).grid
            _, ber = rxcomm.detect_bits(eq, cfg, pilots, reference_bits=bits)
            errors += ber * nbits
            total += nbits
        bers[kind] = errors / total
    ok = bers["otfs"] <= bers["ofdm"]
    report("Doppler robustness: equalized OTFS BER <= OFDM BER at 11.1 kHz "
           "Doppler, 20 dB SNR, 1e6 bits", ok,
           f"OTFS {bers['otfs']:.2e} vs OFDM {bers['ofdm']:.2e}")


def test_determinism_across_workers(tmp_path):
    cfg_text = """\
experiment = sense
waveforms = ofdm, otfs
m = 64
n = 16
trials = 60
seed = 1
snr_db = 30
range_m = 10
velocity_mps = 5.5555555556
out = {out}
"""
    outputs = {}
    for workers in (1, 8):
        out = tmp_path / f"w{workers}.csv"
        cfg_path = tmp_path / f"w{workers}.cfg"
        cfg_path.write_text(cfg_text.format(out=out))
        proc = subprocess.run(
            [sys.executable, "-m", "thzisac.cli", "run", str(cfg_path),
             "--workers", str(workers)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs[workers] = out.read_bytes()
    ok = outputs[1] == outputs[8] and len(outputs[1]) > 0
    report("determinism: byte-identical CSV with 1 and 8 workers", ok,
           f"{len(outputs[1])} bytes compared")
