"""Exception types shared across the library.

Domain errors deliberately subclass ValueError so that callers who do not
care about the fine-grained taxonomy can catch a single familiar type.
"""


class OmptError(ValueError):
    """Base class for all library-specific errors."""


class ZeroColumnError(OmptError):
    """A column that should be normalized has (numerically) zero norm."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"column {index} has zero norm (below 1e-14)")


class RankDeficientError(OmptError):
    """Restricted least squares hit a numerically rank-deficient system."""


class NotSymmetricError(OmptError):
    """A matrix required to be symmetric is not, beyond tolerance."""


class DimensionTooLargeError(OmptError):
    """Exhaustive sign-vector enumeration refused above the size cap."""

    def __init__(self, m: int, cap: int):
        self.m = m
        self.cap = cap
        super().__init__(f"matrix dimension {m} exceeds enumeration cap {cap}")


class KOutOfRangeError(OmptError):
    """A sparsity/order parameter k lies outside its admissible range."""


class EnumerationBudgetExceededError(OmptError):
    """A subset enumeration would exceed the configured budget."""

    def __init__(self, d: int, k: int, count: int, budget: int):
        self.d = d
        self.k = k
        self.count = count
        self.budget = budget
        super().__init__(
            f"C({d},{k}) = {count} subsets exceeds enumeration budget {budget}"
        )


class SingularSubsetError(OmptError):
    """A restricted Gram block is singular; carries the witness subset."""

    def __init__(self, subset):
        self.subset = tuple(int(i) for i in subset)
        super().__init__(
            f"restricted Gram matrix for atoms {self.subset} is singular"
        )


class DeltaOutOfRangeError(OmptError):
    """A restricted isometry constant argument must satisfy 0 <= delta < 1."""


class TOutOfRangeError(OmptError):
    """A threshold argument must lie strictly inside (0, 1)."""


class MissingMetricError(OmptError):
    """A coherence report lacks a metric required by the requested bound."""


class BackendUnavailableError(OmptError):
    """The explicitly requested solver backend cannot be imported."""


class IoError(OmptError):
    """An input/output failure, annotated with the offending path."""

    def __init__(self, path, cause):
        self.path = str(path)
        self.cause = cause
        super().__init__(f"{path}: {cause}")
