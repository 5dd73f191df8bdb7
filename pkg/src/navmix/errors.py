"""Exception taxonomy shared across the pipeline.

Every failure mode raised by the library derives from :class:`NavmixError`
so callers can catch pipeline problems without swallowing programming
errors. :class:`AsymmetricAdjacency` is a warning, not an error: importers
repair one-sided adjacency by intersection and keep going.
"""

from __future__ import annotations


class NavmixError(Exception):
    """Base class for all library errors."""


# geometry / graph model

class DegenerateDirection(NavmixError):
    """Two positions coincide in the X-Y plane, so no heading exists."""


class UnknownEdge(NavmixError):
    """An edge was referenced that is not part of the graph."""


class NotABridge(NavmixError):
    """A side-of-edge query requires the edge to be a bridge."""


class DisconnectedGraph(NavmixError):
    """The operation requires a connected graph."""


# centrality

class GraphTooLarge(NavmixError):
    """The exhaustive centrality oracle is limited to small graphs."""


# key edge selection

class NoKeyEdge(NavmixError):
    """No bridge in the graph is crossed by any supervised path."""


# scene mixing

class KeyEdgeInvalid(NavmixError):
    """A key edge does not belong to the given scene or is not a bridge."""


class SceneIdCollision(NavmixError):
    """The two scenes being mixed share the same scene id."""


class AlreadyAligned(NavmixError):
    """Orientation alignment was requested twice for the same cross scene."""


class NotAligned(NavmixError):
    """Panorama mixing requires an aligned cross scene unless overridden."""


class KReplaceOutOfRange(NavmixError):
    """The horizontal view replacement count must be within 0..12."""


# path / instruction splicing

class MisalignedChunks(NavmixError):
    """Instruction chunk spans do not form a valid path/token alignment."""


class InvalidJunction(NavmixError):
    """A spliced path's junction pair is not a cross edge of the scene."""


class NoDonors(NavmixError):
    """One of the paired scenes has no path crossing its key edge."""


# dataset handling

class BadParams(NavmixError):
    """Generation or sampling parameters are outside their valid range."""


class ParseError(NavmixError):
    """An input file could not be parsed into the expected shape."""


class InvariantViolation(NavmixError):
    """A typed record violates one of its invariants.

    Carries the offending record id and the rule name so loaders can
    point at the exact input line that broke.
    """

    def __init__(self, record: str, rule: str, detail: str = ""):
        self.record = record
        self.rule = rule
        self.detail = detail
        msg = f"{record}: {rule}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


# evaluation

class InvalidPath(NavmixError):
    """A replayed path uses a vertex or step that the scene does not have."""


class BadLengths(NavmixError):
    """Path-length arguments to a metric are negative or non-finite."""


class EmptyPath(NavmixError):
    """Path-similarity metrics require nonempty paths."""


class AsymmetricAdjacency(UserWarning):
    """Connectivity import found one-sided adjacency flags (symmetrized)."""
