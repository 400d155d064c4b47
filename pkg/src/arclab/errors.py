"""Typed exceptions shared across the package.

Every operation that can reject its input raises one of these rather than a bare
ValueError, so callers (and the CLI, which maps them to exit code 3) can react by
type.  NoConvergence carries diagnostics and maps to exit code 4.
"""


class ArclabError(Exception):
    """Base class for all validation and numerical errors raised here."""


class DegenerateRay(ArclabError):
    """Two light-cone points lie on the same ray (no lambda length)."""


class NonRealizable(ArclabError):
    """No light-cone configuration realizes the requested lambda lengths."""


class BadGluing(ArclabError):
    """Side-slot pairing is not a partial matching of the listed slots."""


class NonOrientable(ArclabError):
    """Gluing is incompatible with coherent triangle orientations."""


class NotFlippable(ArclabError):
    """Edge is self-folded or on the boundary; no quadrilateral to flip."""


class InvalidCycle(ArclabError):
    """Triangle sequence is not a cycle of triangles."""


class UnknownPuncture(ArclabError):
    """Puncture id does not name a vertex of the triangulation."""


class PreconditionViolated(ArclabError):
    """Hypothesis of the statement being checked does not hold."""


class DegenerateHull(ArclabError):
    """Point configuration too degenerate for a hull cell."""


class IterationLimit(ArclabError):
    """Search guard exceeded; carries the visited states in args[1] if set."""


class Infeasible(ArclabError):
    """Linear constraints admit no strictly positive sector vector."""


class NoConvergence(ArclabError):
    """Minimizer stopped above tolerance.  args[1] holds diagnostics."""


class CouplingViolated(ArclabError):
    """The two flanking triangles of an edge disagree on its lambda length."""


class TooLarge(ArclabError):
    """Input beyond the documented desk-scale cap for an exhaustive search."""


class LoopEdge(ArclabError):
    """Whitehead move requested on an edge with both ends at one vertex."""


class NotSecondary(ArclabError):
    """Bonding has crossing bonds where a secondary structure is required."""


class NotBinary(ArclabError):
    """Bonding has a site of degree two or more where binarity is required."""


class NotExhaustive(ArclabError):
    """Some boundary component carries no arc endpoint."""


class NonPositiveWeight(ArclabError):
    """Arc weights must be strictly positive."""


class FaceAbsent(ArclabError):
    """Requested face is not a face of the complex."""


class EmptyComplex(ArclabError):
    """Operation undefined on the empty complex."""
