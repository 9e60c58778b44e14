"""Exception types shared across the package."""

from __future__ import annotations


class PptcanonError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(PptcanonError, ValueError):
    """Array shapes are inconsistent with the declared subsystem dimensions."""


class NotHermitianError(PptcanonError, ValueError):
    """A matrix required to be Hermitian deviates beyond tolerance."""


class NotPositiveSemidefiniteError(PptcanonError, ValueError):
    """A matrix required to be positive semidefinite has a negative eigenvalue
    beyond tolerance."""


class SingularMatrixError(PptcanonError, ValueError):
    """A matrix required to be invertible is singular at the working tolerance."""


class ConvergenceError(PptcanonError, RuntimeError):
    """An iterative routine exhausted its iteration or retry budget."""


class CommutationError(PptcanonError, ValueError):
    """A family of matrices violates a required commutation or normality
    relation.

    Attributes:
        relation: human-readable name of the violated relation.
        residual: Frobenius norm of the offending commutator.
        bound: largest residual the tolerance would have accepted.
    """

    def __init__(self, relation: str, residual: float, bound: float):
        self.relation = relation
        self.residual = residual
        self.bound = bound
        super().__init__(
            f"relation {relation} violated: residual {residual:.3e} exceeds {bound:.3e}"
        )


class CanonicalExtractionError(PptcanonError, ValueError):
    """Base class for failures while reading a canonical form off a state."""


class RankHypothesisError(CanonicalExtractionError):
    """The state or its distinguished corner block does not have the declared
    rank."""


class BlockMismatchError(CanonicalExtractionError):
    """After gauging, some block of the state does not match the word product
    predicted by the extracted operators.

    Attributes:
        mismatches: list of ((row_index, col_index), residual) pairs, worst first.
    """

    def __init__(self, mismatches: list[tuple[tuple[int, int], float]], bound: float):
        self.mismatches = mismatches
        self.bound = bound
        (i, j), worst = mismatches[0]
        super().__init__(
            f"{len(mismatches)} block(s) deviate from the word pattern "
            f"(worst: block ({i},{j}) residual {worst:.3e}, bound {bound:.3e})"
        )


class MatrixFormatError(PptcanonError, ValueError):
    """A serialized matrix file violates the expected grammar."""
