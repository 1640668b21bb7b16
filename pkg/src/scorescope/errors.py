"""Exception hierarchy shared by all scorescope modules."""


class ScorescopeError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ScorescopeError):
    """An input file is unreadable or violates its schema."""


class PreconditionError(ScorescopeError):
    """An operation was invoked outside its stated contract."""
