"""Run record schemas and CSV persistence for histories and residuals."""
