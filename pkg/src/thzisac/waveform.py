"""Transmit/receive symbol-domain chains for the four frame formats.

A frame is an M-subcarrier by N-symbol grid.  OFDM and DFT-s-OFDM place data
in the time-frequency (TF) domain; OTFS and DFT-s-OTFS place data in the
delay-Doppler (DD) domain and reach the TF domain through the inverse
symplectic finite Fourier transform (ISFFT).  All stages are unitary; the
cyclic prefix is the only non-unitary step and is accounted for explicitly.

Transform orientation (fixed convention):

* ISFFT:  TF[m, n] = (MN)^(-1/2) * sum_{l,k} DD[l, k]
          * exp(+j 2 pi n k / N) * exp(-j 2 pi m l / M)
  i.e. an N-point inverse DFT along the Doppler axis followed by an M-point
  DFT along the delay axis, both unitary.
* DFT-s-OFDM spreads each symbol's length-M data vector with a unitary DFT
  before subcarrier mapping (full-band mapping).
* DFT-s-OTFS spreads each delay row's length-N data vector with a unitary DFT
  along the Doppler axis before the ISFFT.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics

KINDS = ("ofdm", "dft-s-ofdm", "otfs", "dft-s-otfs")
TF_KINDS = ("ofdm", "dft-s-ofdm")
DD_KINDS = ("otfs", "dft-s-otfs")

PILOT_SCHEMES = ("none", "scattered", "dedicated-symbol")


@dataclass(frozen=True)
class WaveformConfig:
    """Frame geometry and carrier parameters for one transmit chain."""

    kind: str
    M: int
    N: int
    delta_f: float
    f_c: float
    cp_len: int
    mod_order: int = 4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unsupported waveform kind {self.kind!r}")
        if self.M < 8 or self.M & (self.M - 1):
            raise ValueError("M must be a power of two >= 8")
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two >= 2")
        if not 0 <= self.cp_len < self.M:
            raise ValueError("cp_len must satisfy 0 <= cp_len < M")
        if self.mod_order not in (4, 16):
            raise ValueError("mod_order must be 4 or 16")
        if self.delta_f <= 0 or self.f_c <= 0:
            raise ValueError("delta_f and f_c must be positive")

    @property
    def sample_rate(self) -> float:
        return self.M * self.delta_f

    @property
    def symbol_duration(self) -> float:
        """Useful-symbol duration T = 1/delta_f (CP excluded)."""
        return 1.0 / self.delta_f

    @property
    def symbol_len(self) -> int:
        return self.M + self.cp_len

    @property
    def frame_len(self) -> int:
        return self.N * self.symbol_len

    @property
    def bits_per_symbol(self) -> int:
        return self.mod_order.bit_length() - 1


@dataclass(frozen=True)
class PilotMask:
    """Per-resource-element pilot flags plus the pilot values themselves."""

    mask: np.ndarray          # bool (M, N), True on pilot REs
    values: np.ndarray        # complex (M, N), zero off-mask
    scheme: str

    @property
    def overhead(self) -> float:
        return float(self.mask.sum()) / self.mask.size

    @property
    def n_pilots(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True)
class Frame:
    samples: np.ndarray
    config: WaveformConfig
    payload_bits: np.ndarray
    pilots: PilotMask
    grid: np.ndarray = field(repr=False, default=None)


def resource_map(cfg: WaveformConfig, pilot_scheme: str,
                 spacing: tuple = (4, 4)) -> PilotMask:
    """Build the pilot mask and pilot values for a frame.

    ``dedicated-symbol`` fills the first OFDM symbol with a full-band
    Zadoff-Chu pilot (overhead 1/N), the constant-envelope sensing reference
    for DFT-s-OFDM.  ``scattered`` places unit-magnitude pilots on a regular
    (freq, time) lattice.  DD-domain waveforms support only ``none``.
    """
    if pilot_scheme not in PILOT_SCHEMES:
        raise ValueError(f"unknown pilot scheme {pilot_scheme!r}")
    mask = np.zeros((cfg.M, cfg.N), dtype=bool)
    values = np.zeros((cfg.M, cfg.N), dtype=np.complex128)
    if pilot_scheme == "none":
        return PilotMask(mask, values, pilot_scheme)
    if cfg.kind in DD_KINDS:
        raise ValueError(f"pilot scheme {pilot_scheme!r} not supported for {cfg.kind}")
    if pilot_scheme == "dedicated-symbol":
        mask[:, 0] = True
        values[:, 0] = numerics.zadoff_chu(cfg.M, 1)
    else:  # scattered
        if cfg.kind == "dft-s-ofdm":
            raise ValueError("scattered pilots cannot coexist with DFT spreading")
        df, dt = spacing
        zc = numerics.zadoff_chu(cfg.M, 1)
        mask[::df, ::dt] = True
        values[::df, ::dt] = zc[::df, None]
    return PilotMask(mask, values, pilot_scheme)


def _no_pilots(cfg: WaveformConfig) -> PilotMask:
    return resource_map(cfg, "none")


def data_re_count(cfg: WaveformConfig, pilots: PilotMask) -> int:
    return cfg.M * cfg.N - pilots.n_pilots


def bits_per_frame(cfg: WaveformConfig, pilots: PilotMask = None) -> int:
    pilots = pilots if pilots is not None else _no_pilots(cfg)
    return data_re_count(cfg, pilots) * cfg.bits_per_symbol


def _place_data(symbols: np.ndarray, pilots: PilotMask, cfg: WaveformConfig) -> np.ndarray:
    """Fill data symbols onto the grid, symbol-time major, skipping pilot REs."""
    grid = pilots.values.copy()
    free = ~pilots.mask
    # column-major fill: for each symbol n, subcarriers in order
    order = free.T  # (N, M)
    grid.T[order] = symbols
    return grid


def _take_data(grid: np.ndarray, pilots: PilotMask) -> np.ndarray:
    return grid.T[~pilots.mask.T]


def isfft(dd: np.ndarray) -> np.ndarray:
    """DD grid -> TF grid (unitary)."""
    return np.fft.fft(np.fft.ifft(dd, axis=1, norm="ortho"), axis=0, norm="ortho")


def sfft(tf: np.ndarray) -> np.ndarray:
    """TF grid -> DD grid; exact inverse of :func:`isfft`."""
    return np.fft.fft(np.fft.ifft(tf, axis=0, norm="ortho"), axis=1, norm="ortho")


def add_cp(blocks: np.ndarray, cp_len: int) -> np.ndarray:
    """Prepend each column's last cp_len samples; (M, N) -> (M+cp, N)."""
    if cp_len == 0:
        return blocks
    return np.concatenate([blocks[-cp_len:, :], blocks], axis=0)


def strip_cp(samples: np.ndarray, cfg: WaveformConfig) -> np.ndarray:
    """Frame samples -> (M, N) per-symbol data blocks."""
    blocks = samples.reshape(cfg.N, cfg.symbol_len).T
    return blocks[cfg.cp_len:, :]


def tf_to_samples(tf: np.ndarray, cfg: WaveformConfig) -> np.ndarray:
    """Per-symbol M-point inverse FFT plus cyclic prefix, serialized."""
    blocks = np.fft.ifft(tf, axis=0, norm="ortho")
    return add_cp(blocks, cfg.cp_len).T.ravel()

def samples_to_tf(samples: np.ndarray, cfg: WaveformConfig) -> np.ndarray:
    return np.fft.fft(strip_cp(samples, cfg), axis=0, norm="ortho")


def grid_from_bits(bits: np.ndarray, pilots: PilotMask, cfg: WaveformConfig) -> np.ndarray:
    """Map payload bits to the kind-specific symbol grid (post-spreading).

    Returns a TF grid for OFDM/DFT-s-OFDM, a DD grid for OTFS/DFT-s-OTFS.
    """
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    need = bits_per_frame(cfg, pilots)
    if bits.size != need:
        raise ValueError(f"expected {need} bits, got {bits.size}")
    symbols = numerics.qam_map(bits, cfg.mod_order)
    grid = _place_data(symbols, pilots, cfg)
    if cfg.kind == "dft-s-ofdm":
        data_cols = ~pilots.mask.any(axis=0)
        grid[:, data_cols] = np.fft.fft(grid[:, data_cols], axis=0, norm="ortho")
    elif cfg.kind == "dft-s-otfs":
        grid = np.fft.fft(grid, axis=1, norm="ortho")
    return grid


def extract_symbols(grid: np.ndarray, cfg: WaveformConfig, pilots: PilotMask) -> np.ndarray:
    """Undo spreading/precoding and gather the data-RE symbols in fill order."""
    grid = np.array(grid)
    if cfg.kind == "dft-s-ofdm":
        data_cols = ~pilots.mask.any(axis=0)
        grid[:, data_cols] = np.fft.ifft(grid[:, data_cols], axis=0, norm="ortho")
    elif cfg.kind == "dft-s-otfs":
        grid = np.fft.ifft(grid, axis=1, norm="ortho")
    return _take_data(grid, pilots)


def modulate(bits, pilots: PilotMask, cfg: WaveformConfig) -> Frame:
    """Bits -> transmit frame samples through the kind-specific chain."""
    pilots = pilots if pilots is not None else _no_pilots(cfg)
    grid = grid_from_bits(bits, pilots, cfg)
    tf = isfft(grid) if cfg.kind in DD_KINDS else grid
    samples = tf_to_samples(tf, cfg)
    return Frame(samples=samples, config=cfg,
                 payload_bits=np.asarray(bits, dtype=np.uint8).ravel(),
                 pilots=pilots, grid=grid)


def demodulate(samples: np.ndarray, cfg: WaveformConfig) -> np.ndarray:
    """Frame samples -> symbol grid (TF for OFDM family, DD for OTFS family).

    Exact inverse of the sample-generation half of :func:`modulate`;
    spreading/precoding is undone separately by :func:`extract_symbols`.
    """
    samples = np.asarray(samples, dtype=np.complex128).ravel()
    if samples.size != cfg.frame_len:
        raise ValueError(f"expected {cfg.frame_len} samples, got {samples.size}")
    tf = samples_to_tf(samples, cfg)
    return sfft(tf) if cfg.kind in DD_KINDS else tf


def modulate_batch_nocp(bits: np.ndarray, cfg: WaveformConfig) -> np.ndarray:
    """Vectorized pilot-free modulation of many frames, CP-stripped.

    ``bits`` has shape (n_frames, bits_per_frame); returns (n_frames, M*N)
    time samples.  Used by the PAPR Monte-Carlo loop.
    """
    b, nbits = bits.shape
    symbols = numerics.qam_map(bits.ravel(), cfg.mod_order).reshape(b, -1)
    grid = np.transpose(symbols.reshape(b, cfg.N, cfg.M), (2, 1, 0))  # (M, N, B)
    if cfg.kind == "dft-s-ofdm":
        grid = np.fft.fft(grid, axis=0, norm="ortho")
    elif cfg.kind == "dft-s-otfs":
        grid = np.fft.fft(grid, axis=1, norm="ortho")
    if cfg.kind in DD_KINDS:
        grid = np.fft.fft(np.fft.ifft(grid, axis=1, norm="ortho"),
                          axis=0, norm="ortho")
    st = np.fft.ifft(grid, axis=0, norm="ortho")
    return np.transpose(st, (2, 1, 0)).reshape(b, cfg.N * cfg.M)
