"""Exception types shared across the package."""


class ShapeError(ValueError):
    pass


class SpectralEstimateError(RuntimeError):
    """Power iteration for the largest eigenvalue did not converge."""


class OracleTooLargeError(ValueError):
    pass


class PhenotypeError(ValueError):
    """A sample lacks a value for a declared measure."""


class DegenerateFeatureError(ValueError):
    pass


class IllPosedError(ValueError):
    """Unregularized ridge system is singular."""


class DivergenceError(FloatingPointError):
    def __init__(self, epoch):
        super().__init__(f"divergence at epoch {epoch}")
        self.epoch = epoch


class ConfigError(ValueError):
    pass


class DataValidationError(ValueError):
    pass
