"""Exception hierarchy shared by all modules."""


class NilfoldError(Exception):
    """Base class for every error raised by the library."""


class ValidationError(NilfoldError):
    """Input does not describe a valid object (CLI exit code 2)."""


class NotLatinSquare(ValidationError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class NoIdentity(ValidationError):
    pass


class BadParameter(ValidationError):
    pass


class NotAHomomorphism(ValidationError):
    pass


class NotNormal(ValidationError):
    pass


class NotSurjective(ValidationError):
    pass


class NotAGroup(ValidationError):
    pass


class NotInVariety(ValidationError):
    pass


class InexactSandwich(ValidationError):
    pass


class SectionCollapse(ValidationError):
    """The triality reflection identified two elements of the S3 section."""


class GuardError(NilfoldError):
    """A size guard or search budget was hit (CLI exit code 3)."""


class TooLarge(GuardError):
    pass


class BudgetExceeded(GuardError):
    """Term search ran out of evaluations.

    ``partial`` holds the best result computed before the budget ran out
    (the elements found at the last fully completed depth).
    """

    def __init__(self, message, partial=None, depth_reached=0):
        super().__init__(message)
        self.partial = partial
        self.depth_reached = depth_reached
