"""Lower bounds on the overhead of anonymous communication.

The package has two halves that check each other:

* closed-form calculators for the minimum bandwidth and latency overhead
  any protocol must pay to reach a given privacy notion (`bounds`,
  `atlas`), and
* a small game engine that runs concrete attacks against toy protocol
  models and measures the adversary's advantage by Monte Carlo or exact
  enumeration (`protocols`, `adversaries`, `game`).

If a formula and the matching attack disagree beyond statistical noise,
one of them is wrong; `acnbounds verify` automates that comparison.
"""

from .core import (NO_COMM, AdversaryCapability, Batch, CapabilityError,
                   Communication, ConfigError, ObservationTrace,
                   ProtocolParams, ResourceLimitError, make_batch)
from .notions import Notion, ScenarioPair, generate_pair, is_valid_pair, parse_notion

__version__ = "0.1.0"

__all__ = [
    "NO_COMM", "AdversaryCapability", "Batch", "CapabilityError",
    "Communication", "ConfigError", "ObservationTrace", "ProtocolParams",
    "ResourceLimitError", "make_batch",
    "Notion", "ScenarioPair", "generate_pair", "is_valid_pair", "parse_notion",
    "__version__",
]
