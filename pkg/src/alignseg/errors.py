"""Exception type shared across the toolkit."""


class DataError(Exception):
    """Raised for malformed inputs and violated data contracts.

    The CLI maps this to exit code 1; anything else escaping a command
    is a bug.
    """
