class CausalBenchError(Exception):
    """Base class for errors raised by causal_bench."""


class SpecError(CausalBenchError, ValueError):
    pass


class GLMError(CausalBenchError, ValueError):
    """A logistic fit could not produce a finite maximum-likelihood estimate."""


class DegenerateOutcomeError(GLMError):
    pass


class SingularDesignError(GLMError):
    pass


class SeparationError(GLMError):
    pass


class ConvergenceError(GLMError):
    pass


class DegenerateTreatmentError(CausalBenchError, ValueError):
    pass


class EmptyMatchError(CausalBenchError, ValueError):
    pass
