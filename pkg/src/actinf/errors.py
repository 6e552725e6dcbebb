"""Exception types shared across the engine."""


class ActinfError(Exception):
    """Base class for all engine errors."""


class ShapeMismatch(ActinfError):
    """Two distributions or tables that must share a shape do not."""


class SupportViolation(ActinfError):
    """A distribution places mass where its reference has none."""


class NonFiniteInput(ActinfError):
    """An input vector contains NaN or infinity."""


class EmptyInput(ActinfError):
    """An operation received an empty vector."""


class IndexOutOfAlphabet(ActinfError):
    """A symbol index falls outside its alphabet."""


class HorizonTooLarge(ActinfError):
    """The enumeration space exceeds the configured cap."""


class ZeroEvidence(ActinfError):
    """The observed history has probability zero under the model."""


class ModelZero(ActinfError):
    """A variational factorization places mass on a model-zero assignment."""


class NonDecreasingGuard(ActinfError):
    """Coordinate ascent increased the objective; indicates a bug."""


class DegenerateNormalizer(ActinfError):
    """All candidate masses underflowed during normalization."""


class NumericalInconsistency(ActinfError):
    """An algebraic identity the engine checks on the fly failed to hold."""


class InvalidDistribution(ActinfError):
    """A probability vector is negative or too far from normalized."""


class BlockOptimizationError(ActinfError):
    """One or more per-action-sequence optimizations failed."""

    def __init__(self, failures):
        self.failures = dict(failures)
        parts = "; ".join(f"{seq}: {exc}" for seq, exc in self.failures.items())
        super().__init__(f"optimization failed for {len(self.failures)} action sequence(s): {parts}")


class ConfigError(ActinfError):
    """An experiment configuration failed validation."""

    def __init__(self, field, message, line=None):
        self.field = field
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{field}: {message}")


class AgentStepError(ActinfError):
    """An agent callback failed; carries the loop step index."""

    def __init__(self, step, cause):
        self.step = step
        super().__init__(f"agent failed at step {step}: {cause!r}")
