"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(PipelineError):
    """Invalid parameter value or flag combination."""


class ShapeError(PipelineError):
    """Mismatched dimensions between related inputs."""


class BoundsError(PipelineError):
    """A window or rectangle falls outside its raster."""


class DataError(PipelineError):
    """Input data is empty, degenerate, or otherwise unusable."""


class FormatError(PipelineError):
    """A file failed to parse.

    ``offset`` (byte position) or ``line`` (1-based line number) locates
    the failure when known.
    """

    def __init__(self, message, *, offset=None, line=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.offset = offset
        self.line = line
