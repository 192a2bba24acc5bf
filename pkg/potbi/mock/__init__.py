"""Hermetic mock consortium: error profiles, keyed simulation, HTTP server and oracle."""
