"""Domain models for potbi."""
