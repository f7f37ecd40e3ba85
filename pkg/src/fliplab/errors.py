"""Exception types shared across the package."""


class FliplabError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FliplabError):
    """Bad user input: config values, hyperparameters, CLI arguments."""


class IngestionError(FliplabError):
    """Corpus could not be read from disk."""


class SplitError(FliplabError):
    """Stratified split is impossible for the given corpus."""


class ShapeError(FliplabError):
    """Input dimensionality does not match what a model was trained on."""


class StageError(FliplabError):
    """A pipeline stage failed; carries the stage name for context."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage
