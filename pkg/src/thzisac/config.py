"""Experiment configuration: flat key = value files with unit suffixes.

Grammar (one assignment per line, '#' starts a comment):

    key = value            value: identifier | number [unit] | comma list
    units: Hz, kHz, MHz, GHz, THz (multipliers on the preceding number)

The schema is strict: unknown keys are rejected before any computation, as is
any missing required key.  This is what makes runs bit-exactly specifiable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import waveform

EXPERIMENTS = ("papr", "sense", "ber", "psd")

_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12}

_NUMBER_RE = re.compile(
    r"^([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([a-zA-Z]+)?$")


class ConfigError(ValueError):
    """Invalid, unknown, or missing configuration content."""


def _parse_scalar(text: str) -> float:
    m = _NUMBER_RE.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse number {text!r}")
    value = float(m.group(1))
    if m.group(2):
        unit = m.group(2).lower()
        if unit not in _UNITS:
            raise ConfigError(f"unknown unit suffix {m.group(2)!r}")
        value *= _UNITS[unit]
    return value


def _parse_int(text: str) -> int:
    v = _parse_scalar(text)
    if v != int(v):
        raise ConfigError(f"expected integer, got {text!r}")
    return int(v)


def _parse_list(text: str, parse):
    return [parse(part) for part in text.split(",")]


@dataclass
class ExperimentConfig:
    experiment: str
    waveforms: list
    m_list: list
    n_list: list
    trials: int
    seed: int
    out: str
    delta_f: float = 1.92e6
    f_c: float = 0.3e12
    cp_fraction: float = 0.25
    mod_order: int = 4
    snr_db: list = field(default_factory=lambda: [30.0])
    oversample: int = 4
    range_m: float = 10.0
    velocity_mps: float = 20.0 / 3.6

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        for w in self.waveforms:
            if w not in waveform.KINDS:
                raise ConfigError(f"unknown waveform kind {w!r}")
        if not self.waveforms:
            raise ConfigError("at least one waveform required")
        if len(self.m_list) != len(self.n_list):
            raise ConfigError("m and n lists must pair up (equal lengths)")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.oversample not in (1, 4):
            raise ConfigError("oversample must be 1 or 4")
        if not 0 <= self.cp_fraction < 1:
            raise ConfigError("cp_fraction must be in [0, 1)")
        # building every referenced chain validates the grid invariants
        try:
            for kind in self.waveforms:
                for m, n in zip(self.m_list, self.n_list):
                    self.waveform_config(kind, m, n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def waveform_config(self, kind: str, m: int, n: int) -> waveform.WaveformConfig:
        return waveform.WaveformConfig(kind=kind, M=m, N=n,
                                       delta_f=self.delta_f, f_c=self.f_c,
                                       cp_len=int(m * self.cp_fraction),
                                       mod_order=self.mod_order)

    def combos(self):
        for kind in self.waveforms:
            for m, n in zip(self.m_list, self.n_list):
                yield self.waveform_config(kind, m, n)


_KEY_PARSERS = {
    "experiment": lambda t: t.strip(),
    "waveforms": lambda t: [w.strip() for w in t.split(",")],
    "m": lambda t: _parse_list(t, _parse_int),
    "n": lambda t: _parse_list(t, _parse_int),
    "trials": _parse_int,
    "seed": _parse_int,
    "out": lambda t: t.strip(),
    "delta_f": _parse_scalar,
    "f_c": _parse_scalar,
    "cp_fraction": _parse_scalar,
    "mod_order": _parse_int,
    "snr_db": lambda t: _parse_list(t, _parse_scalar),
    "oversample": _parse_int,
    "range_m": _parse_scalar,
    "velocity_mps": _parse_scalar,
}

_FIELD_NAMES = {"m": "m_list", "n": "n_list"}

_REQUIRED = ("experiment", "waveforms", "m", "n", "trials", "seed", "out")


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, rhs = line.partition("=")
        key = key.strip().lower()
        if key not in _KEY_PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _KEY_PARSERS[key](rhs)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    kwargs = {_FIELD_NAMES.get(k, k): v for k, v in values.items()}
    return ExperimentConfig(**kwargs)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc


_FIG3_TEXT = """\
# PAPR CCDF comparison of the four frame formats at 0.3 THz
experiment = papr
waveforms = ofdm, dft-s-ofdm, otfs, dft-s-otfs
m = 64, 128
n = 16, 32
delta_f = 1.92 MHz
f_c = 0.3 THz
mod_order = 4
oversample = 4
trials = 10000
seed = 1
out = fig3_ccdf.csv
"""

_FIG4_TEXT = """\
# Range-accuracy comparison: 10 m target at 20 km/h, 30 dB SNR
experiment = sense
waveforms = ofdm, dft-s-ofdm, otfs, dft-s-otfs
m = 64, 128
n = 16, 32
delta_f = 1.92 MHz
f_c = 0.3 THz
mod_order = 4
snr_db = 30
range_m = 10
velocity_mps = 5.5555555556
trials = 200
seed = 1
out = fig4_rmse.csv
"""

PRESETS = {"fig3": _FIG3_TEXT, "fig4": _FIG4_TEXT}


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    return PRESETS[name]


def preset_config(name: str) -> ExperimentConfig:
    return parse_config(preset_text(name))
