"""Exception hierarchy.

Every error carries a ``code`` (the class name) so the CLI can print
``error: <code>: <detail>`` lines without a lookup table.
"""


class RelembedError(Exception):
    """Base class for all library errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# -- input / parsing (CLI exit 3) -------------------------------------------

class ParseError(RelembedError):
    pass


class EdgeListParseError(ParseError):
    pass


class EmbeddingFormatError(ParseError):
    pass


# -- graph ------------------------------------------------------------------

class InvalidGraph(RelembedError):
    pass


class UnknownFamily(RelembedError):
    pass


class InvalidParams(RelembedError):
    pass


class EmptySignSet(RelembedError):
    pass


class SamplingFailed(RelembedError):
    pass


# -- embeddings -------------------------------------------------------------

class SizeMismatch(RelembedError):
    pass


class PerSourceUnsupported(RelembedError):
    pass


class ZeroEmbedding(RelembedError):
    pass


class ZeroThreshold(RelembedError):
    pass


# -- constructions / compression ---------------------------------------------

class CyclicGraph(RelembedError):
    pass


class NotRobust(RelembedError):
    pass


class NotSpherical(RelembedError):
    pass


class ZeroColumn(RelembedError):
    pass


class RetriesExhausted(RelembedError):
    pass


# -- optimize ---------------------------------------------------------------

class TooLarge(RelembedError):
    pass
