"""ekstat: exact sieve statistics of omega(n-1) on integers with k prime
factors, with the matching analytic predictions, a query service and a CLI.
"""

__version__ = "0.1.0"

from . import analytic, census, charfn, errors, sieve  # noqa: F401
