"""Spectral coexistence: MWC sensing, band selection, shaping and bounds."""

from .bands import REM, SpectralMap, band_select, shape_transmit_spectrum
from .ezb import ezb, ezb_multiband, ezb_wideband
from .loop import SpecxConfig, specx_loop
from .mwc import (MWCConfig, ctf_frame, mwc_sample, radar_slice_support,
                  support_recover_known)

__all__ = ["REM", "SpectralMap", "band_select", "shape_transmit_spectrum", "ezb",
           "ezb_multiband", "ezb_wideband", "SpecxConfig", "specx_loop", "MWCConfig",
           "ctf_frame", "mwc_sample", "radar_slice_support", "support_recover_known"]
