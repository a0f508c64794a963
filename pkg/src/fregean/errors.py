"""Exception types shared by every module."""


class FregeanError(Exception):
    """Base class for all library errors."""


class UnknownSymbol(FregeanError):
    def __init__(self, name, offset=None):
        self.name = name
        self.offset = offset
        where = "" if offset is None else f" at byte {offset}"
        super().__init__(f"unknown symbol {name!r}{where}")


class ArityMismatch(FregeanError):
    def __init__(self, name, expected, got, offset=None):
        self.name = name
        self.expected = expected
        self.got = got
        self.offset = offset
        where = "" if offset is None else f" at byte {offset}"
        super().__init__(f"{name!r} takes {expected} argument(s), got {got}{where}")


class TermSyntaxError(FregeanError):
    """Malformed term text; ``offset`` is a byte offset into the UTF-8 input."""

    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} at byte {offset}")


class MissingAssignment(FregeanError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"no value assigned to x{index}")


class CapExceeded(FregeanError):
    def __init__(self, what, limit):
        self.what = what
        self.limit = limit
        super().__init__(f"{what} exceeds cap {limit}")


class NoDesignatedTerm(FregeanError):
    pass


class NotUnifiable(FregeanError):
    pass


class PreconditionFailed(FregeanError):
    """Raised when a synthesis routine's hypothesis does not hold.

    ``condition`` is a short machine-readable name such as ``"chi_identity"``
    or ``"special_unifier"``.
    """

    def __init__(self, condition, detail=""):
        self.condition = condition
        self.detail = detail
        msg = f"precondition failed: {condition}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ConditionThreeFailed(FregeanError):
    pass


class InvalidContext(FregeanError):
    pass
