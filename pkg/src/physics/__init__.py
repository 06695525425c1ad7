"""Equation of motion, physics residuals and residual oracles."""
