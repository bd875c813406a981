"""Exception types shared across the pipeline."""


class Syntree2VecError(Exception):
    """Base class for all pipeline errors."""


class ConlluFormatError(Syntree2VecError):
    """Malformed CoNLL-U input (wrong column count, bad field syntax)."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class TreeValidationError(Syntree2VecError):
    """A sentence block parses but does not form a valid dependency tree."""

    def __init__(self, message: str, sentence: str):
        super().__init__(f"{sentence}: {message}")
        self.sentence = sentence


class EmptyVocabularyError(Syntree2VecError):
    """Every word was filtered out (or the corpus was empty)."""


class GraphFormatError(Syntree2VecError):
    """Malformed graph file."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"byte {byte_offset}: {message}")
        self.byte_offset = byte_offset


class GraphVersionError(Syntree2VecError):
    """Graph file declares an unsupported format version."""


class DegenerateDistributionError(Syntree2VecError):
    """A discrete distribution has no positive mass to sample from."""


class EmbeddingFormatError(Syntree2VecError):
    """Malformed embedding file."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class VocabularyMismatchError(Syntree2VecError):
    """A walk contains a word that is not in the vocabulary."""


class NumericError(Syntree2VecError):
    """A non-finite value appeared where a finite one is required."""
