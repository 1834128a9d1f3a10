"""Exception hierarchy shared by all modules.

Every error carries an ``exit_code`` so the command line front end can map
failures onto distinct process statuses without a lookup table.
"""


class DRMPCError(Exception):
    exit_code = 1


class DimensionError(DRMPCError, ValueError):
    exit_code = 2


class NotControllable(DRMPCError):
    exit_code = 3


class IllConditioned(DRMPCError):
    exit_code = 4


class NumericallyUncontrollable(NotControllable, IllConditioned):
    """Controllable by the eigenvector test, but the Krylov blocks are
    numerically rank deficient.

    Raised where a rank test on the controllability blocks fails for a pair
    that is controllable in exact arithmetic. Callers that only care about
    controllability see a :class:`NotControllable`; the benchmark sees an
    :class:`IllConditioned`.
    """

    exit_code = 4


class RankDeficient(DRMPCError):
    exit_code = 5


class ConsistencyError(DRMPCError):
    exit_code = 6


class EmptyTightening(DRMPCError):
    exit_code = 7

    def __init__(self, family: str, stage: int):
        super().__init__(f"tightened {family} set at stage {stage} is empty")
        self.family = family
        self.stage = stage


class Infeasible(DRMPCError):
    exit_code = 8


class Unbounded(DRMPCError):
    exit_code = 9


class NumericalFailure(DRMPCError):
    exit_code = 10


class DimensionGuard(DRMPCError):
    exit_code = 11
