"""Goblend: persona imitation through archive-based exploration."""
