"""Single source of the package version for code and service metadata."""

__version__ = "0.1.0"
