"""Delay-Doppler multipath channel and transceiver impairments.

Fractional path delays are applied as frequency-domain phase ramps over the
whole frame.  The per-symbol cyclic prefix makes this circular model exact for
any delay inside the CP, which keeps the channel bit-exactly testable against
the analytic expression

    y(t) = sum_p gain_p * x(t - tau_p) * exp(j 2 pi nu_p t) + n(t).

Impairments:

* AWGN at a configured per-sample SNR, with noise power measured from the
  actual post-channel signal power.
* Wiener (free-running oscillator) phase noise.  The per-sample phase
  increment variance is 2*pi*beta/fs where the effective linewidth beta scales
  with carrier frequency squared, i.e. +6 dB per carrier doubling.
* Memoryless Rapp AM/AM power-amplifier compression (no AM/PM), with the
  saturation amplitude set from the signal RMS and the input backoff.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

C_LIGHT = 299_792_458.0  # m/s, exact


class CyclicPrefixWarning(UserWarning):
    """A path delay exceeds the cyclic-prefix coverage (ambiguous sensing)."""


@dataclass(frozen=True)
class PathSpec:
    gain: complex
    delay: float      # seconds
    doppler: float    # Hz

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("path delay must be non-negative")
        if not np.isfinite(self.gain):
            raise ValueError("path gain must be finite")


@dataclass(frozen=True)
class ChannelSpec:
    paths: tuple
    snr_db: float = None   # None -> noiseless

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise ValueError("at least one path required")


@dataclass(frozen=True)
class SensingScenario:
    range_m: float
    velocity_mps: float
    rcs_gain: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.range_m <= 0:
            raise ValueError("range_m must be positive")


@dataclass(frozen=True)
class ImpairmentSpec:
    pn_linewidth_ref_hz: float = 0.0
    pn_ref_carrier_hz: float = 300e9
    pa_model: str = "none"
    pa_smoothness: float = 2.0
    pa_ibo_db: float = 10.0

    def __post_init__(self):
        if self.pn_linewidth_ref_hz < 0:
            raise ValueError("linewidth must be non-negative")
        if self.pa_smoothness <= 0:
            raise ValueError("pa_smoothness must be positive")
        if self.pa_model not in ("none", "rapp"):
            raise ValueError(f"unknown PA model {self.pa_model!r}")


def scenario_to_paths(s: SensingScenario, f_c: float) -> PathSpec:
    """Monostatic echo: two-way delay and two-way Doppler shift."""
    if f_c <= 0:
        raise ValueError("carrier frequency must be positive")
    return PathSpec(gain=s.rcs_gain,
                    delay=2.0 * s.range_m / C_LIGHT,
                    doppler=2.0 * s.velocity_mps * f_c / C_LIGHT)


def effective_linewidth(imp: ImpairmentSpec, f_c: float) -> float:
    """Oscillator linewidth at carrier f_c: quadratic in frequency ratio.

    Doubling f_c quadruples the linewidth (and hence the phase-increment
    variance), i.e. the phase-noise power grows 6 dB per carrier doubling.
    """
    return imp.pn_linewidth_ref_hz * (f_c / imp.pn_ref_carrier_hz) ** 2


def apply_paths(x: np.ndarray, paths, sample_rate: float) -> np.ndarray:
    """Noiseless multipath application (frame-circular fractional delays)."""
    x = np.asarray(x, dtype=np.complex128).ravel()
    n = x.size
    freqs = np.fft.fftfreq(n, d=1.0 / sample_rate)
    t = np.arange(n) / sample_rate
    spec = np.fft.fft(x)
    y = np.zeros(n, dtype=np.complex128)
    for p in paths:
        delayed = np.fft.ifft(spec * np.exp(-2j * np.pi * freqs * p.delay))
        y += p.gain * delayed * np.exp(2j * np.pi * p.doppler * t)
    return y


def apply_paths_adjoint(y: np.ndarray, paths, sample_rate: float) -> np.ndarray:
    """Adjoint of :func:`apply_paths` (conjugate gains, reversed shifts)."""
    y = np.asarray(y, dtype=np.complex128).ravel()
    n = y.size
    freqs = np.fft.fftfreq(n, d=1.0 / sample_rate)
    t = np.arange(n) / sample_rate
    x = np.zeros(n, dtype=np.complex128)
    for p in paths:
        v = y * np.exp(-2j * np.pi * p.doppler * t)
        x += np.conj(p.gain) * np.fft.ifft(
            np.fft.fft(v) * np.exp(2j * np.pi * freqs * p.delay))
    return x


def awgn(x: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add complex white Gaussian noise at the given per-sample SNR.

    Noise power is calibrated against the measured mean power of ``x``.
    """
    x = np.asarray(x, dtype=np.complex128)
    p_sig = np.mean(np.abs(x) ** 2)
    p_noise = p_sig / 10.0 ** (snr_db / 10.0)
    scale = np.sqrt(p_noise / 2.0)
    noise = rng.normal(scale=scale, size=x.shape) + 1j * rng.normal(scale=scale, size=x.shape)
    return x + noise


def apply_channel(x, spec: ChannelSpec, sample_rate: float,
                  rng: np.random.Generator = None, cp_len: int = None) -> np.ndarray:
    """Multipath plus AWGN.  Warns if a delay exceeds the CP coverage."""
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    if cp_len is not None:
        max_delay = max(p.delay for p in spec.paths)
        if max_delay * sample_rate > cp_len:
            warnings.warn(
                f"path delay {max_delay:.3e} s exceeds CP coverage "
                f"({cp_len} samples); sensing beyond unambiguous range",
                CyclicPrefixWarning)
    y = apply_paths(x, spec.paths, sample_rate)
    if spec.snr_db is not None:
        if rng is None:
            raise ValueError("rng required when snr_db is set")
        y = awgn(y, spec.snr_db, rng)
    return y


def apply_phase_noise(x, imp: ImpairmentSpec, f_c: float, sample_rate: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Multiply by exp(j*phi) with phi a Wiener process, phi[0] = 0."""
    x = np.asarray(x, dtype=np.complex128).ravel()
    beta = effective_linewidth(imp, f_c)
    if beta == 0.0:
        return x.copy()
    sigma = np.sqrt(2.0 * np.pi * beta / sample_rate)
    increments = rng.normal(scale=sigma, size=x.size - 1)
    phi = np.concatenate([[0.0], np.cumsum(increments)])
    return x * np.exp(1j * phi)


def apply_pa(x, imp: ImpairmentSpec) -> np.ndarray:
    """Rapp AM/AM compression; identity when pa_model is 'none'."""
    x = np.asarray(x, dtype=np.complex128)
    if imp.pa_model == "none":
        return x.copy()
    rms = np.sqrt(np.mean(np.abs(x) ** 2))
    sat = rms * 10.0 ** (imp.pa_ibo_db / 20.0)
    p = imp.pa_smoothness
    gain = (1.0 + (np.abs(x) / sat) ** (2 * p)) ** (-1.0 / (2 * p))
    return x * gain
