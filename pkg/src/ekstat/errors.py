"""Exception hierarchy shared by all ekstat modules."""


class EkstatError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(EkstatError, ValueError):
    """A configuration value is outside its allowed range."""


class PreconditionError(EkstatError, ValueError):
    """An operation was called with arguments violating its contract."""


class DomainError(EkstatError, ValueError):
    """A mathematical argument is outside the domain of the statistic."""


class EmptyClassError(EkstatError, ValueError):
    """Requested a distribution over a class k with zero members."""


class PoleError(EkstatError, ArithmeticError):
    """Evaluation hit a pole (or a forbidden zero factor) of a special function."""


class DivergenceError(EkstatError, ArithmeticError):
    """The per-prime factors do not decay like 1 + O(1/p^2)."""


class AliasingError(EkstatError, ValueError):
    """Too few roots of unity to resolve all polynomial coefficients."""


class CacheError(EkstatError, IOError):
    """Base class for histogram cache file problems."""


class CacheMissError(CacheError):
    """No cached histogram for (x, w) and building was not permitted."""


class CacheFormatError(CacheError):
    """Bad magic, version, dimensions or trailing garbage in a cache file."""


class CacheTruncatedError(CacheError):
    """Cache file is shorter than the fixed record layout requires."""


class CacheChecksumError(CacheError):
    """Cache file content does not match its trailing checksum."""
