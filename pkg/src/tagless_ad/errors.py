class ContractViolation(RuntimeError):
    """A runtime contract was broken (one-shot rule, debug invariant, ...)."""


class InvariantViolation(ContractViolation):
    pass


class EffectError(ContractViolation):
    pass


class UnhandledEffect(EffectError):
    pass


class ContinuationAlreadyResumed(EffectError):
    pass
