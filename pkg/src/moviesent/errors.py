"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value (bad hyperparameter, malformed flag combination)."""


class DataError(ValueError):
    """Malformed input data: vocab files, review files, checkpoints, prediction files."""


class DivergenceError(RuntimeError):
    """Non-finite values encountered during a forward pass or training step."""
