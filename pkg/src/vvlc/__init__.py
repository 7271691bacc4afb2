"""3D geometry-based stochastic channel simulator for vehicular visible-light MISO links."""

__version__ = "0.1.0"
