"""Exception hierarchy shared across the toolkit."""


class AspectsumError(ValueError):
    """Base class for all toolkit errors."""


class CorpusError(AspectsumError):
    """Malformed corpus, aspect-spec, or evaluation files."""


class EmbeddingError(AspectsumError):
    """Malformed embedding files or dimension mismatches."""


class ModelError(AspectsumError):
    """Invalid model shapes, empty bags, or training failures."""


class SynthesisError(AspectsumError):
    """Dataset construction or controller (de)serialization failures."""


class ControllerParseError(SynthesisError):
    """Controller string does not conform to the grammar."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class SummarizerError(AspectsumError):
    """Invalid queries or summarization inputs."""


class EvaluationError(AspectsumError):
    """Scoring called with unusable inputs."""


class ConfigError(AspectsumError):
    """Invalid configuration files or values."""
