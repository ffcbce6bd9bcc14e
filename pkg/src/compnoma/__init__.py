"""Monte Carlo and numerical-analytic evaluation of CoMP-NOMA downlink for aerial users."""

from .netmodel import ConfigError, LinkType, NetworkConfig

__all__ = ["ConfigError", "LinkType", "NetworkConfig"]
