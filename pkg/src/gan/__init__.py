"""Conditional generator/discriminator wiring, adversarial losses and the epsilon schedule."""
