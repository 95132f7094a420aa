"""Exception hierarchy; each class maps to a distinct CLI exit code."""


class CodeBpcError(Exception):
    exit_code = 1


class ConfigError(CodeBpcError):
    """Bad or inconsistent configuration (flags, window/stride, run config)."""

    exit_code = 2


class InputError(CodeBpcError):
    """Missing, malformed, or insufficient input data."""

    exit_code = 3


class ComputeError(CodeBpcError):
    """A computation could not be carried out on otherwise valid inputs."""

    exit_code = 4


class OutputError(CodeBpcError):
    """An artifact could not be written."""

    exit_code = 5
