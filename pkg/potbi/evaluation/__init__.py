"""Scoring of members, majority vote and judge against labeled data."""
