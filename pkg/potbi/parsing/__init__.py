"""Structuring of raw model text into taxonomy predictions."""
