"""Test suite for the physics-guided GAN experiments."""
