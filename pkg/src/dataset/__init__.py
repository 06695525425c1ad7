"""Pre-training dataset synthesis, normalization and batching."""
