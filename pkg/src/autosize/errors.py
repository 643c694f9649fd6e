class InvalidConfigurationError(ValueError):
    """A size, order or hyperparameter is outside its legal range."""


class ModelFormatError(ValueError):
    """A model or vocabulary file is malformed or inconsistent."""


class TrainingDivergedError(RuntimeError):
    """The training loss became NaN or infinite."""

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}, minibatch {batch}")
