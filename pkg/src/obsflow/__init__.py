"""obsflow: observer-controlled particle and heat flows in a two-branch
tight-binding nanodevice coupled to hot/cold thermal baths."""

__version__ = "0.1.0"

from .lattice import (  # noqa: F401
    DeviceSpec,
    PhysParams,
    Region,
    SiteSpec,
    build_flat_device,
    build_ratchet_device,
    convert_units,
)
from .config import Config, ConfigError, SweepGrid, parse_config  # noqa: F401
