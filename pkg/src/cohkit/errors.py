class CohKitError(Exception):
    pass


class ValidationError(CohKitError, ValueError):
    """Malformed input: bad normalization, shape, or a broken invariant."""


class NotMajorizedError(CohKitError, ValueError):
    pass


class HypothesisError(CohKitError, ValueError):
    """The input violates a standing hypothesis (e.g. unequal coherence ranks)."""


class NecessaryConditionError(CohKitError, ValueError):
    """A necessary condition for the transformation fails, so it is impossible."""


class ConditionsNotMetError(CohKitError, ValueError):
    """The sufficient conditions of a constructor do not hold for the input."""


class InternalInconsistencyError(CohKitError, RuntimeError):
    pass
