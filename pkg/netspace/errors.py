"""Exception classes shared by the library, the CLI and the API."""


class NetSpaceError(Exception):
    """Base class for every error raised by netspace."""


class DomainError(NetSpaceError, ValueError):
    """Invalid mathematical input: bad element id, level <= 0, beta = -1, aliasing, ..."""


class CapacityError(NetSpaceError, ValueError):
    """An exhaustive enumeration would exceed its hard cap."""


class ConfigError(NetSpaceError, ValueError):
    """Invalid command line or TOML configuration."""


class ConsistencyError(NetSpaceError, RuntimeError):
    """Two independent computations that must agree did not."""


def exit_code_for(error: Exception) -> int:
    """
    Map an exception to the CLI exit code.

    Args:
        error (Exception): The raised error.

    Returns:
        int: 1 for verification/consistency failures, 2 for usage and input errors.
    """
    if isinstance(error, ConsistencyError):
        return 1
    return 2
