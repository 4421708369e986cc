"""Persona discovery by Ward clustering of session summaries."""
