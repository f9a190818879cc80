"""Exception types shared across the engine."""


class RouteCrowdError(Exception):
    """Base class for all engine errors."""


class EmptyCalibration(RouteCrowdError):
    """No point of a raw route snapped to any landmark."""


class EmptySet(RouteCrowdError):
    """An operation that needs a non-empty landmark set got an empty one."""


class UnknownLandmark(RouteCrowdError):
    """A record referenced a landmark id that is not in the index."""


class EmptyGraph(RouteCrowdError):
    """Significance inference requires at least one visit edge."""


class TooLarge(RouteCrowdError):
    """Instance exceeds the guard of an exponential-time oracle."""


class Infeasible(RouteCrowdError):
    """No discriminative landmark set exists for the candidate routes."""


class NotDiscriminative(RouteCrowdError):
    """The landmark set cannot tell all candidate routes apart."""


class InvalidTrace(RouteCrowdError):
    """An answer trace diverges from the question tree."""


class DimensionMismatch(RouteCrowdError):
    """Matrix shapes disagree."""


class Divergence(RouteCrowdError):
    """Training objective became non-finite."""


class NoCandidates(RouteCrowdError):
    """No worker passed the eligibility filters."""


class NotAssigned(RouteCrowdError):
    """Worker is not assigned to the task."""


class WrongQuestion(RouteCrowdError):
    """Submitted answer does not match the next expected question."""


class TaskClosed(RouteCrowdError):
    """The task is already resolved or expired."""


class Unresolvable(RouteCrowdError):
    """Deadline reached with zero completed answer traces."""
