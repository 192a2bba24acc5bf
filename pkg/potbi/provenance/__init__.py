"""Tamper-evident provenance trail."""
