"""Energy-minimizing resource allocation for an IRS-aided wireless-powered
mobile-edge-computing system over OFDM sub-bands."""

from .params import SystemParams
from .channel import (
    ChannelSet,
    Geometry,
    IrsVector,
    build_channels,
    cfr,
    compose_reflection,
    make_instance,
    path_loss_gain,
    sample_cir,
    sample_geometry,
)

__all__ = [
    "SystemParams",
    "ChannelSet",
    "Geometry",
    "IrsVector",
    "build_channels",
    "cfr",
    "compose_reflection",
    "make_instance",
    "path_loss_gain",
    "sample_cir",
    "sample_geometry",
]

__version__ = "0.1.0"
