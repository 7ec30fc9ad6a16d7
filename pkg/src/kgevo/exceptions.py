"""Exception hierarchy shared by every kgevo module.

All library errors derive from :class:`KgevoError`; the CLI maps them to
exit status 2.
"""


class KgevoError(Exception):
    """Base class for data errors raised by kgevo."""


class NTriplesError(KgevoError):
    """Raised by the parser in strict mode; carries the first ParseError."""

    def __init__(self, error):
        super().__init__(str(error))
        self.error = error


class UnknownId(KgevoError, KeyError):
    pass


class UnknownVersion(KgevoError, KeyError):
    pass


class NonMonotoneTimestamp(KgevoError):
    pass


class CorruptChain(KgevoError):
    pass


class EmptyInput(KgevoError, ValueError):
    pass


class InvalidTheta(KgevoError, ValueError):
    pass


class InvalidOmega(KgevoError, ValueError):
    pass


class EmptyGraph(KgevoError, ValueError):
    pass


class NotConverged(KgevoError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class UndefinedDependency(KgevoError, ZeroDivisionError):
    """ED = EC/SC with no ontology-specific changes."""


class NoTrainableTriples(KgevoError, ValueError):
    pass


class EmptySnapshot(KgevoError, ValueError):
    pass


class UnknownEntity(KgevoError, KeyError):
    pass


class TooFewEntities(KgevoError, ValueError):
    pass


class PlannedTripleMissing(KgevoError, KeyError):
    pass
