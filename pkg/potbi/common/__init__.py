"""Common utilities for configuration, errors and telemetry."""
