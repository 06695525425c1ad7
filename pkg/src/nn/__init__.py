"""Dense-network engine: forward/backward passes, initialization and Adam."""
