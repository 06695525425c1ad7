"""Command-line entry point and experiment configuration."""
