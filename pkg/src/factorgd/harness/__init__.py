"""Configuration, presets, output files and the command line."""
