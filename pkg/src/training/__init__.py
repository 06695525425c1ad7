"""Experiment pipelines: pre-training, regime training, evaluation and checkpoints."""
