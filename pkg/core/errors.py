class ProtocolError(RuntimeError):
    pass


class NormalizationError(ProtocolError, ValueError):
    """A state or SU(2) parameter pair is not normalized."""


class DimensionError(ProtocolError, ValueError):
    pass


class DomainError(ProtocolError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class EnsembleViolationError(ProtocolError, ValueError):
    """A target state does not belong to the declared ensemble."""


class CompletenessError(ProtocolError, ValueError):
    """POVM elements do not sum to the identity."""


class InvalidEffectError(ProtocolError, ValueError):
    """An operator is not a valid measurement effect (0 <= Pi <= I)."""


class LocalityError(ProtocolError):
    """A party touched a subsystem it does not hold."""


class LedgerFrozenError(ProtocolError):
    pass
