"""One-sided device-independent certification of |phi+> with trine POVMs."""

from .povm import alice_ideal, bob_ideal
from .scenario import distribution_from, steering_functional

__all__ = ["alice_ideal", "bob_ideal", "distribution_from", "steering_functional"]
__version__ = "0.1.0"
