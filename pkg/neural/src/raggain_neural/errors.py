"""Exceptions for the neural scoring package."""


class NeuralError(Exception):
    """Base class."""


class ModelLoadError(NeuralError):
    """A configured checkpoint could not be loaded."""


class InputError(NeuralError):
    """Invalid or incomplete input data."""


class ContextLengthError(NeuralError):
    """An assembled input exceeds the model's context window."""
