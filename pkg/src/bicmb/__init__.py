"""Analysis and simulation of bit-interleaved coded multiple beamforming."""

__version__ = "0.1.0"
