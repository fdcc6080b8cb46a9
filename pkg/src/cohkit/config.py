"""Process-wide numerical tolerances.

Every function that needs a threshold takes an optional keyword argument; when
it is omitted the current value from :data:`tolerances` is used.  The CLI sets
these from ``--tol`` / ``--zero-threshold`` (or ``COHKIT_TOL`` and
``COHKIT_ZERO_THRESHOLD``).
"""

from __future__ import annotations

import contextlib
import dataclasses
import os


@dataclasses.dataclass
class Tolerances:
    # modulus below which an amplitude or matrix entry counts as zero
    zero: float = 1e-10
    # generic equality tolerance (sums, residuals, validations)
    tol: float = 1e-9
    # states whose norm is off by less than this may be renormalized on request
    renorm: float = 1e-6

    def __post_init__(self):
        if self.zero <= 0 or self.tol <= 0:
            raise ValueError("tolerances must be positive")


def _from_env() -> Tolerances:
    kw = {}
    if "COHKIT_ZERO_THRESHOLD" in os.environ:
        kw["zero"] = float(os.environ["COHKIT_ZERO_THRESHOLD"])
    if "COHKIT_TOL" in os.environ:
        kw["tol"] = float(os.environ["COHKIT_TOL"])
    return Tolerances(**kw)


tolerances = _from_env()


def zero_tol(value: float | None = None) -> float:
    return tolerances.zero if value is None else value


def tol(value: float | None = None) -> float:
    return tolerances.tol if value is None else value


@contextlib.contextmanager
def override(**kwargs):
    """Temporarily replace fields of :data:`tolerances`."""
    old = dataclasses.replace(tolerances)
    try:
        for k, v in kwargs.items():
            if not hasattr(tolerances, k):
                raise AttributeError(k)
            setattr(tolerances, k, v)
        tolerances.__post_init__()
        yield tolerances
    finally:
        for f in dataclasses.fields(old):
            setattr(tolerances, f.name, getattr(old, f.name))
