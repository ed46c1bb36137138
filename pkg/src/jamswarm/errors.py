class ConfigurationError(ValueError):
    """Raised when a scenario, grid or swarm configuration is unusable."""
