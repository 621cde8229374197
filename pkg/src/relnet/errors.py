"""Exception types shared across the package."""


class RelnetError(Exception):
    """Base class for all relnet errors."""


class InvalidNodeId(RelnetError):
    """A node id falls outside the valid range 0..n-1."""


class DisconnectedGraph(RelnetError):
    """An operation requiring a connected graph received a disconnected one."""


class UndefinedMetric(RelnetError):
    """The requested metric is not defined for this graph (e.g. no edges)."""


class FormatError(RelnetError):
    """A file does not match its declared on-disk format."""


class TooSmall(RelnetError):
    """Graph size below the minimum for the requested construction."""


class TooLarge(RelnetError):
    """Requested sample or size exceeds what the input provides."""


class EdgeSaturation(RelnetError):
    """The static-model edge sampler exhausted its attempt budget.

    Carries the number of consecutive failed draws at the point of abort.
    """

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


class TooManyCommunities(RelnetError):
    """More communities requested than the node count supports."""


class TooManyNodes(RelnetError):
    """More graph nodes than hidden units; the partition is infeasible."""


class ShapeError(RelnetError):
    """Array or graph shapes do not line up."""


class NumericError(RelnetError):
    """A non-finite value appeared where finite numbers are required."""


class FitError(RelnetError):
    """A least-squares fit is rank-deficient or under-determined."""
