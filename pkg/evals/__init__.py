"""Slow acceptance evaluations for pubench."""
