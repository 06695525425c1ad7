"""PG-GAN: physics-guided generative adversarial networks for projectile trajectories."""

__version__ = "0.1.0"
