"""Consensus over consortium predictions."""
