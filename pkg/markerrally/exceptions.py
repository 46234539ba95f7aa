"""Custom exceptions raised by markerrally."""

from markerrally import const


class MarkerRallyError(Exception):
    """Base class; ``exit_code`` is what the command line returns."""

    exit_code = const.EXIT_DATA


class ConfigurationError(MarkerRallyError):
    """The resolved run configuration or a command line flag is invalid."""

    exit_code = const.EXIT_USAGE

    def __init__(self, message: str, errors=None):
        super().__init__(message)
        self.errors = errors or {}


class InvalidSegment(ConfigurationError):
    pass


class DataFileError(MarkerRallyError):
    """A track, checkpoint or log file is missing, unreadable or corrupt."""

    def __init__(self, message: str, path=None):
        super().__init__(message)
        self.path = path


class EpisodeOver(MarkerRallyError):
    pass


class InvalidAction(MarkerRallyError):
    pass


class ShapeMismatch(MarkerRallyError):
    pass


class StaleCache(MarkerRallyError):
    pass


class BufferTooSmall(MarkerRallyError):
    pass


class EmptyResults(MarkerRallyError):
    pass
