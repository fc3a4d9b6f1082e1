"""Seedable physical-layer simulator for THz integrated sensing and
communication waveforms: OFDM, DFT-s-OFDM, OTFS and DFT-s-OTFS end to end,
with impaired channels, communication receivers, monostatic sensing
estimators, and a Monte-Carlo experiment harness."""

from .channel import (ChannelSpec, ImpairmentSpec, PathSpec, SensingScenario,
                      scenario_to_paths)
from .waveform import Frame, PilotMask, WaveformConfig, demodulate, modulate, resource_map

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec", "Frame", "ImpairmentSpec", "PathSpec", "PilotMask",
    "SensingScenario", "WaveformConfig", "demodulate", "modulate",
    "resource_map", "scenario_to_paths",
]
