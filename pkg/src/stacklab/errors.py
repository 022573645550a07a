"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`StacklabError`.
The CLI maps :class:`InputError` subclasses to exit code 2 and
:class:`PreconditionError` subclasses to exit code 3.
"""


class StacklabError(Exception):
    pass


class InputError(StacklabError, ValueError):
    """Malformed input data (parse errors, broken JSON payloads, word mismatches)."""


class PreconditionError(StacklabError, ValueError):
    """A documented precondition of an operation does not hold."""


# words
class FactorConjugate(PreconditionError):
    """The word is conjugate into a single free factor."""

    def __init__(self, element, conjugator):
        super().__init__(f"word is conjugate into factor {element.factor}: {element}")
        self.element = element
        self.conjugator = conjugator


class NotCyclicallyReduced(PreconditionError):
    pass


class ProperPower(PreconditionError):
    pass


# plline
class MonotonicityViolation(PreconditionError):
    pass


class OverlappingSupports(PreconditionError):
    pass


# actions
class FactorMismatch(PreconditionError):
    pass


# stacker
class BadPattern(PreconditionError):
    pass


class CapacityExceeded(PreconditionError):
    pass


class EqualElements(PreconditionError):
    pass


class InternalCheckFailed(StacklabError):
    """A construction failed its own exact postcondition. Signals a bug."""


class CombineFailed(StacklabError):
    pass


# surfaces / enumerator
class InvalidMatching(InputError):
    pass


class WordMismatch(InputError):
    pass


class CapExceeded(PreconditionError):
    pass


class BudgetExceeded(PreconditionError):
    pass


class SystemMismatch(PreconditionError):
    """Systems to be combined do not share their equations."""
