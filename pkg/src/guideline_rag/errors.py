"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class GuidelineRagError(Exception):
    """Base class for all engine errors."""


# --- corpus ingestion ---------------------------------------------------


class MalformedXml(GuidelineRagError):
    """Raised when a source document cannot be parsed as XML."""


class EmptyDocument(GuidelineRagError):
    """Raised when a parsed document has no body text."""


class UnknownGuidanceType(GuidelineRagError):
    """Raised when a document id does not map to a known guidance type."""


class EmptyCorpus(GuidelineRagError):
    """Raised when an operation requires a non-empty corpus."""


# --- chunking / tokenization ---------------------------------------------


class UnknownTokenizer(GuidelineRagError):
    """Raised when a tokenizer id is not registered."""


# --- retrieval ------------------------------------------------------------


class EmptyQuery(GuidelineRagError):
    """Raised when a query preprocesses to no searchable terms."""


class OrdinalOutOfRange(GuidelineRagError):
    """Raised when a chunk ordinal is outside the indexed range."""


class EmptyValidationSet(GuidelineRagError):
    """Raised when parameter tuning is given no validation pairs."""


class ZeroVector(GuidelineRagError):
    """Raised when normalizing a vector with no nonzero element."""


class DimensionMismatch(GuidelineRagError):
    """Raised when two vectors of different dimensions are combined."""


class ModelMismatch(GuidelineRagError):
    """Raised when a vector store and embedding client disagree on model."""


class MissingWeight(GuidelineRagError):
    """Raised when a ranked list's source has no fusion weight configured."""


class EmptyInput(GuidelineRagError):
    """Raised when fusion receives no ranked lists."""


class EmptyCandidates(GuidelineRagError):
    """Raised when reranking receives an empty candidate list."""


# --- clients ---------------------------------------------------------------


class ClientUnavailable(GuidelineRagError):
    """Raised when a remote client cannot be reached after retries."""


class TextTooLong(GuidelineRagError):
    """Raised when an input text exceeds a client's context length.

    Carries the index of the offending text in the submitted batch.
    """

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"text at index {index} exceeds the context length")


class EmbeddingFailed(GuidelineRagError):
    """Raised when embedding fails after the retry policy is exhausted."""


class ContextOverflow(GuidelineRagError):
    """Raised when a prompt would exceed the model's context window."""


# --- evaluation ------------------------------------------------------------


class ExcludedSection(GuidelineRagError):
    """Raised when query generation is attempted on a boilerplate section."""


class EmptyEvalSet(GuidelineRagError):
    """Raised when a metric report is requested over no pairs."""


class JudgeUnparseable(GuidelineRagError):
    """Raised when a judge response is not valid JSON after one retry."""


# --- service ----------------------------------------------------------------


class IndexMissing(GuidelineRagError):
    """Raised when a pipeline is asked to run without its index artifacts."""


class PipelineStageError(GuidelineRagError):
    """Wraps a failure with the pipeline stage in which it occurred."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
