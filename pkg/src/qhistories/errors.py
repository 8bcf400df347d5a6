class ValidationError(ValueError):
    """Input fails a structural check (unitarity, orthonormality, shapes...)."""


class EnumerationCapError(ValidationError):
    """The outcome space is larger than the configured enumeration cap."""


class PostselectionError(ValidationError):
    """A postselected outcome has zero total probability."""


class NumericalContractError(RuntimeError):
    """A computed result violates an identity it is required to satisfy."""
