class ModelError(ValueError):
    """Base class for model, vocabulary and training errors."""


class ModelConfigError(ModelError):
    pass


class VocabularyError(ModelError):
    """Unknown token, or a vocabulary larger than the configured threshold."""


class TrainingDiverged(ModelError):
    def __init__(self, epoch: int, step: int, loss: float):
        self.epoch = epoch
        self.step = step
        self.loss = loss
        super().__init__(f"loss became {loss} at epoch {epoch}, step {step}")
