"""Packaged parameter presets."""
