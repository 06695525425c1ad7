"""Residual statistics, report tables and figures."""
