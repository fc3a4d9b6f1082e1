"""Low-level numeric primitives shared by every other module.

Conventions fixed here, once:

* All discrete Fourier transforms are unitary (scaled by 1/sqrt(L) in both
  directions), so Parseval holds exactly and power metrics are
  domain-independent.
* Random numbers come from numpy's Philox counter-based generator
  (Philox4x64-10).  Identical 64-bit seeds produce identical streams on every
  platform, and per-trial seeds are derived as ``seed XOR trial_index`` so
  Monte-Carlo runs are reproducible regardless of scheduling.
* QAM mapping is Gray-coded with unit average symbol energy; the exact
  bit-to-point tables are documented at :func:`qam_map`.
"""

from __future__ import annotations

import math

import numpy as np

RNG_ALGORITHM = "philox4x64-10"

_SEED_MASK = (1 << 64) - 1


class SizingError(ValueError):
    """A buffer length violates a transform's size requirement."""


class ParameterError(ValueError):
    """A scalar parameter is outside its valid domain."""


def make_rng(seed: int) -> np.random.Generator:
    """Return the toolkit's documented generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(seed & _SEED_MASK))


def derive_seed(seed: int, index: int) -> int:
    """Per-trial seed: master seed XOR trial index (both 64-bit)."""
    return (seed ^ index) & _SEED_MASK


def _check_finite(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.size == 0:
        raise SizingError("empty buffer")
    if not np.all(np.isfinite(x)):
        raise ValueError("buffer contains non-finite samples")
    return x


def fft(x, inverse: bool = False) -> np.ndarray:
    """Unitary radix-2 FFT of a complex buffer.

    The length must be a power of two; every configured grid dimension is.
    """
    x = _check_finite(x)
    n = x.shape[-1]
    if n & (n - 1):
        raise SizingError(f"FFT length {n} is not a power of two")
    if inverse:
        return np.fft.ifft(x, norm="ortho")
    return np.fft.fft(x, norm="ortho")


# Gray-coded constellations, unit average energy.
#
# 4-QAM: bit pair (b0, b1) -> (I, Q) with 0 -> +1, 1 -> -1, scaled by 1/sqrt(2):
#   00 -> (+1+1j)/sqrt(2)   01 -> (+1-1j)/sqrt(2)
#   10 -> (-1+1j)/sqrt(2)   11 -> (-1-1j)/sqrt(2)
# 16-QAM: bits (b0 b1 b2 b3), (b0 b1) -> I level, (b2 b3) -> Q level through
# the Gray table {00: +3, 01: +1, 11: -1, 10: -3}, scaled by 1/sqrt(10).
_LEVELS_2 = np.array([1.0, -1.0])
_LEVELS_4 = np.array([3.0, 1.0, -3.0, -1.0])  # indexed by the 2-bit integer b0b1


def _axis_levels(order: int):
    if order == 4:
        return _LEVELS_2, 1, math.sqrt(2.0)
    if order == 16:
        return _LEVELS_4, 2, math.sqrt(10.0)
    raise ParameterError(f"unsupported QAM order {order}")


def constellation(order: int) -> np.ndarray:
    """All constellation points, indexed by the integer value of the bit label."""
    labels = np.arange(order)
    nbits = order.bit_length() - 1
    bits = ((labels[:, None] >> np.arange(nbits - 1, -1, -1)) & 1).astype(np.uint8)
    return qam_map(bits.ravel(), order)


def qam_map(bits, order: int) -> np.ndarray:
    """Map a bit sequence onto Gray-coded unit-energy QAM symbols."""
    levels, bits_per_axis, scale = _axis_levels(order)
    bits = np.asarray(bits, dtype=np.uint8)
    k = 2 * bits_per_axis
    if bits.size % k:
        raise SizingError(f"bit count {bits.size} not divisible by {k}")
    b = bits.reshape(-1, k)
    if bits_per_axis == 1:
        i_idx = b[:, 0]
        q_idx = b[:, 1]
    else:
        i_idx = 2 * b[:, 0] + b[:, 1]
        q_idx = 2 * b[:, 2] + b[:, 3]
    return (levels[i_idx] + 1j * levels[q_idx]) / scale


def qam_demap(symbols, order: int) -> np.ndarray:
    """Hard minimum-distance demapping; exact inverse of qam_map on clean points."""
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    points = constellation(order)
    idx = np.argmin(np.abs(symbols[:, None] - points[None, :]) ** 2, axis=1)
    nbits = order.bit_length() - 1
    bits = ((idx[:, None] >> np.arange(nbits - 1, -1, -1)) & 1).astype(np.uint8)
    return bits.ravel()


def zadoff_chu(length: int, root: int) -> np.ndarray:
    """Zadoff-Chu (CAZAC) sequence: unit envelope, ideal cyclic autocorrelation.

    Odd lengths use exp(-j*pi*u*n*(n+1)/L); even lengths use the even-case
    CAZAC form exp(-j*pi*u*n^2/L), which keeps the same properties and lets a
    power-of-two grid carry a full-band constant-envelope pilot.
    """
    if length <= 0:
        raise ParameterError("length must be positive")
    if math.gcd(root, length) != 1:
        raise ParameterError(f"root {root} not coprime to length {length}")
    n = np.arange(length)
    if length % 2:
        phase = -np.pi * root * n * (n + 1) / length
    else:
        phase = -np.pi * root * n * n / length
    return np.exp(1j * phase)


def interpolate_fft(x, factor: int) -> np.ndarray:
    """Band-limited interpolation by frequency-domain zero padding.

    Works on the last axis; factor 1 returns the input unchanged.  Output is
    scaled so sample amplitudes are preserved (not energy), which keeps PAPR
    ratios meaningful.
    """
    x = np.asarray(x, dtype=np.complex128)
    if factor == 1:
        return x
    n = x.shape[-1]
    spec = np.fft.fft(x, axis=-1)
    padded = np.zeros(x.shape[:-1] + (factor * n,), dtype=np.complex128)
    half = n // 2
    padded[..., :half] = spec[..., :half]
    padded[..., -(n - half):] = spec[..., half:]
    return np.fft.ifft(padded, axis=-1) * factor
