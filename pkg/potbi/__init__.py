"""potbi package root: consortium diagnosis orchestration."""

__version__ = "0.1.0"
