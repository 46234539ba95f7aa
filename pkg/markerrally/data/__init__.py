"""Domain value types and persistence."""
