"""Exception types shared across the package."""


class BloomRfError(Exception):
    """Base class for all library errors."""


class ConfigError(BloomRfError, ValueError):
    """Invalid or infeasible filter configuration."""


class BitStoreBoundsError(BloomRfError, IndexError):
    """Bit or word access outside a segment."""


class QueryBoundsError(BloomRfError, ValueError):
    """Malformed query arguments (inverted range, key outside domain)."""


class SerializationError(BloomRfError, ValueError):
    """Corrupt, truncated, or incompatible filter file."""


class GenerationError(BloomRfError, RuntimeError):
    """Workload generator could not satisfy its constraints."""


class AdvisorError(BloomRfError, ValueError):
    """No feasible configuration within the memory budget."""
