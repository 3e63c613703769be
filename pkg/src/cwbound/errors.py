"""Exception types shared across the package."""


class CWBoundError(Exception):
    """Base class for all package-specific errors."""


class SelfLoop(CWBoundError):
    """An edge connects a node to itself."""


class DuplicateEdge(CWBoundError):
    """The same undirected node pair appears more than once."""


class NonPositiveWeight(CWBoundError):
    """An edge weight is zero, negative, or not finite."""


class IdOutOfRange(CWBoundError):
    """A node id falls outside 0..node_count-1."""


class EmptyNetwork(CWBoundError):
    """Too few nodes to generate a network."""


class DegenerateShape(CWBoundError):
    """A shape specification violates its geometric constraints."""


class UnreachableDegree(CWBoundError):
    """No connection radius can achieve the requested average degree."""


class EmptyCluster(CWBoundError):
    """A cluster operation was asked to work on zero members."""


class DegenerateInput(CWBoundError):
    """Statistic undefined for the given input (e.g. zero variance)."""


class ConfigError(CWBoundError):
    """An experiment configuration is invalid."""
