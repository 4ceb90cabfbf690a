"""Exception types shared across the workbench."""


class SoficityLabError(Exception):
    """Base class for every error raised by this package."""


class NonUnitDeterminant(SoficityLabError, ValueError):
    pass


class ScaleExceeded(SoficityLabError, RuntimeError):
    """An enumeration would exceed its configured element or subset budget."""


class UnknownFamily(SoficityLabError, KeyError):
    pass


class UnknownLabel(SoficityLabError, KeyError):
    pass


class OutOfRange(SoficityLabError, IndexError):
    pass


class NotRegular(SoficityLabError, ValueError):
    pass


class NoConvergence(SoficityLabError, RuntimeError):
    def __init__(self, tol, max_iters):
        super().__init__(f"power iteration did not reach tol={tol} in {max_iters} iterations")
        self.tol = tol
        self.max_iters = max_iters


class NoAdmissibleSubset(SoficityLabError, ValueError):
    pass


class NotACovering(SoficityLabError, ValueError):
    def __init__(self, message, vertex=None, label=None):
        super().__init__(message)
        self.vertex = vertex
        self.label = label


class MismatchedModel(SoficityLabError, ValueError):
    pass


class NotInjective(SoficityLabError, ValueError):
    pass


class MismatchedRanks(SoficityLabError, ValueError):
    pass


class IncompleteMap(SoficityLabError, KeyError):
    pass


class NotHyperbolic(SoficityLabError, ValueError):
    """Raised by :func:`soficity_lab.pingpong.classify_hyperbolic`.

    ``reason`` is one of ``degenerateTop``, ``degenerateBottom`` or
    ``notSemisimpleAtExtremes``.
    """

    def __init__(self, reason, detail=""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class UndefinedProjection(SoficityLabError, ValueError):
    pass


class InvalidInput(SoficityLabError, ValueError):
    pass


class ConfigError(SoficityLabError, ValueError):
    def __init__(self, step, reason):
        super().__init__(f"step {step!r}: {reason}")
        self.step = step
        self.reason = reason
