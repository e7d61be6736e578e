"""Bundled scenario configurations for the acceptance suite."""
