"""Shared utilities: configuration, logging, errors, formatting."""
