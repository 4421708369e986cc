"""Archive-based exploration with trace-imitation rewards."""
