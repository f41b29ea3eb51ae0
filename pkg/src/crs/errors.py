"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
error families onto distinct process exit statuses.
"""

from __future__ import annotations


class CrsError(Exception):
    """Base class for all library errors."""

    exit_code = 1


# -- schema / input (exit 2) -------------------------------------------------


class InvalidInput(CrsError, ValueError):
    exit_code = 2


class SchemaError(InvalidInput):
    """Instance document failed validation; ``path`` is a JSON path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class AlphaOutOfRange(InvalidInput):
    pass


# -- hypothesis unmet (exit 3) -----------------------------------------------


class HypothesisUnmet(CrsError):
    exit_code = 3


class NoMemberFound(HypothesisUnmet):
    pass


class DegenerateCone(HypothesisUnmet):
    pass


class SspFailed(HypothesisUnmet):
    pass


class WitnessGapEmpty(HypothesisUnmet):
    pass


class LambdaNotPositive(HypothesisUnmet):
    pass


class PreconditionFailed(HypothesisUnmet):
    pass


class NoBoundedBase(HypothesisUnmet):
    pass


class EmptySlice(HypothesisUnmet):
    pass


# -- numerically inconclusive (exit 4) ---------------------------------------


class Inconclusive(CrsError):
    exit_code = 4


class UnresolvedPairs(Inconclusive):
    """Membership verdicts were Unknown for the listed ``(i, j)`` pairs."""

    def __init__(self, pairs):
        self.pairs = list(pairs)
        super().__init__(f"{len(self.pairs)} pair(s) with Unknown membership: {self.pairs[:10]}")


# -- theorem assertion failure (exit 5) --------------------------------------


class TheoremViolation(CrsError):
    """A sampled check contradicted a conclusion that should hold.

    ``witness`` holds the offending tuple for auditing.
    """

    exit_code = 5

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class MixtureDetected(TheoremViolation):
    pass


class EnclosureFailed(TheoremViolation):
    pass


class NotEfficientInK(TheoremViolation):
    pass


class InclusionViolated(TheoremViolation):
    pass
