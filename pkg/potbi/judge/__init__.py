"""Reasoning judge: arbitration prompt, verdict parsing, decision policy."""
