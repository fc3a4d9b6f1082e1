"""PAPR/CCDF, EVM and power-spectral-density measurement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics, waveform

PAPR_AXIS_DB = np.round(np.arange(0.0, 14.0 + 1e-9, 0.1), 1)
EVM_FLOOR_DB = -150.0


@dataclass(frozen=True)
class CcdfCurve:
    papr_axis: np.ndarray      # dB grid, 0..14 in 0.1 dB steps
    probability: np.ndarray    # P(PAPR > axis value)
    frames: int


def papr_db(x, oversample: int = 1) -> float:
    """Peak-to-average power ratio in dB, optionally on the band-limited
    interpolation of the buffer (continuous-time proxy)."""
    if oversample not in (1, 4):
        raise ValueError("oversample must be 1 or 4")
    x = np.asarray(x, dtype=np.complex128).ravel()
    power = np.abs(numerics.interpolate_fft(x, oversample)) ** 2
    mean = power.mean()
    if mean == 0:
        raise ValueError("zero-energy buffer has no PAPR")
    return float(10.0 * np.log10(power.max() / mean))


def frame_paprs(cfg: waveform.WaveformConfig, frames: int, oversample: int,
                seed: int, start: int = 0, batch: int = 500) -> np.ndarray:
    """Per-frame PAPR (dB) of CP-stripped transmit samples, one frame per
    derived seed.  Deterministic in (seed, frame index) regardless of batching."""
    if oversample not in (1, 4):
        raise ValueError("oversample must be 1 or 4")
    nbits = waveform.bits_per_frame(cfg)
    out = np.empty(frames)
    for lo in range(0, frames, batch):
        hi = min(lo + batch, frames)
        bits = np.empty((hi - lo, nbits), dtype=np.uint8)
        for i in range(lo, hi):
            rng = numerics.make_rng(numerics.derive_seed(seed, start + i))
            bits[i - lo] = rng.integers(0, 2, nbits, dtype=np.uint8)
        samples = waveform.modulate_batch_nocp(bits, cfg)
        power = np.abs(numerics.interpolate_fft(samples, oversample)) ** 2
        out[lo:hi] = 10.0 * np.log10(power.max(axis=1) / power.mean(axis=1))
    return out


def ccdf_from_paprs(paprs: np.ndarray) -> CcdfCurve:
    paprs = np.asarray(paprs, dtype=np.float64)
    prob = np.mean(paprs[None, :] > PAPR_AXIS_DB[:, None], axis=1)
    return CcdfCurve(papr_axis=PAPR_AXIS_DB.copy(), probability=prob,
                     frames=paprs.size)


def ccdf(cfg: waveform.WaveformConfig, frames: int, oversample: int,
         seed: int) -> CcdfCurve:
    """CCDF of the per-frame PAPR over independently seeded random frames."""
    return ccdf_from_paprs(frame_paprs(cfg, frames, oversample, seed))


def ccdf_papr_at(curve: CcdfCurve, probability: float) -> float:
    """PAPR value (dB) where the CCDF crosses the given probability,
    linearly interpolated on the log-probability axis."""
    prob = curve.probability
    below = np.flatnonzero(prob <= probability)
    if below.size == 0:
        return float(curve.papr_axis[-1])
    j = below[0]
    if j == 0 or prob[j] == prob[j - 1]:
        return float(curve.papr_axis[j])
    p0, p1 = np.log(prob[j - 1]), np.log(max(prob[j], 1e-12))
    w = (np.log(probability) - p0) / (p1 - p0)
    return float(curve.papr_axis[j - 1] + w * (curve.papr_axis[j] - curve.papr_axis[j - 1]))


def evm_db(ref_grid, meas_grid) -> float:
    """Error vector magnitude relative to the reference grid, floored at -150 dB."""
    ref = np.asarray(ref_grid, dtype=np.complex128)
    meas = np.asarray(meas_grid, dtype=np.complex128)
    if ref.shape != meas.shape:
        raise ValueError("grid shape mismatch")
    num = np.sum(np.abs(meas - ref) ** 2)
    den = np.sum(np.abs(ref) ** 2)
    if den == 0:
        raise ValueError("zero-energy reference")
    if num == 0:
        return EVM_FLOOR_DB
    return float(max(10.0 * np.log10(num / den), EVM_FLOOR_DB))


def psd(x, segments: int) -> np.ndarray:
    """Averaged Hann-windowed periodogram, normalized so white noise of unit
    power measures a flat 0 dB spectrum.  Returns per-bin power, fftshifted."""
    if segments < 1:
        raise ValueError("segments must be >= 1")
    x = np.asarray(x, dtype=np.complex128).ravel()
    seg_len = x.size // segments
    if seg_len < 2:
        raise ValueError("buffer too short for requested segment count")
    window = np.hanning(seg_len)
    norm = np.sum(window ** 2)
    acc = np.zeros(seg_len)
    for s in range(segments):
        seg = x[s * seg_len:(s + 1) * seg_len] * window
        acc += np.abs(np.fft.fft(seg)) ** 2 / norm
    return np.fft.fftshift(acc / segments)
