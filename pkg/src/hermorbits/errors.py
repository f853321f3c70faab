"""Exception types shared across the package."""


class HermOrbitsError(Exception):
    pass


class RankTooSmall(HermOrbitsError, ValueError):
    def __init__(self, family, rank):
        super().__init__(f"rank {rank} is below the minimum allowed for type {family}")
        self.family = family
        self.rank = rank


class DecomposableSystem(HermOrbitsError, ValueError):
    pass


class NotInSpan(HermOrbitsError, ValueError):
    pass


class NotNonCompact(HermOrbitsError, ValueError):
    def __init__(self, phi, reason=""):
        msg = f"simple root {phi} is not of non-compact type"
        super().__init__(msg + (f": {reason}" if reason else ""))
        self.phi = phi


class BadPattern(HermOrbitsError, ValueError):
    pass


class UnrecognizedPattern(HermOrbitsError, ValueError):
    pass


class IncompatibleSize(HermOrbitsError, ValueError):
    pass


class DegenerateSpec(HermOrbitsError, ValueError):
    pass


class DegenerateCartan(HermOrbitsError, RuntimeError):
    pass


class SpectrumNotThreePoint(HermOrbitsError, RuntimeError):
    pass


class NoConvergence(HermOrbitsError, RuntimeError):
    pass


class EmbeddingMismatch(HermOrbitsError, RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
