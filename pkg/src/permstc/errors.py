"""Exception types raised across the package."""


class PermstcError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(PermstcError, ValueError):
    """Malformed multiset, initial vector or build parameters."""


class DomainMismatchError(PermstcError, ValueError):
    """Operands live on different multisets, dimensions or shapes."""


class InvalidRateError(PermstcError, ValueError):
    """More codewords requested than the initial vector can provide."""


class ResourceLimitError(PermstcError, MemoryError):
    """A guard on enumeration size was exceeded."""


class InjectivityError(PermstcError, ValueError):
    """A sphere point lies outside the domain where the manifold map is injective."""


class InvariantError(PermstcError, ValueError):
    """A numerical invariant (orthonormality, unit norm, ...) does not hold."""


class CompositionError(PermstcError, ValueError):
    """Composing an outer code with an inner code produced duplicate codewords."""


class CodebookFormatError(PermstcError, ValueError):
    """A codebook or config file could not be parsed."""
