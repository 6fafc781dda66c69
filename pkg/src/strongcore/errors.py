"""Exception hierarchy shared by every module of the package."""


class StrongCoreError(Exception):
    """Base class for all errors raised by :mod:`strongcore`."""


class MalformedDocument(StrongCoreError):
    pass


class UnknownAgent(StrongCoreError):
    pass


class CycleInStrictRelation(StrongCoreError):
    """The closure of a strict relation is not irreflexive."""


class ConflictingRestriction(StrongCoreError):
    pass


class NonEdgeRestriction(StrongCoreError):
    pass


class EmptySubset(StrongCoreError):
    pass


class InvalidAllocation(StrongCoreError):
    pass


class InstanceTooLarge(StrongCoreError):
    pass


class NotAWeakOrder(StrongCoreError):
    pass


class NotInStrongCore(StrongCoreError):
    pass


class NotAnImprovement(StrongCoreError):
    def __init__(self, condition, message):
        super().__init__(f"condition {condition} violated: {message}")
        self.condition = condition


class IoFailure(StrongCoreError):
    pass
