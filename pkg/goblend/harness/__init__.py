"""Experiment harness: statistics, the experiment matrix, exports and rendering."""
