"""End-to-end case and dataset runs."""
