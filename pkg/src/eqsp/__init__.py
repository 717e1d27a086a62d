"""Phase estimation with GHZ probes and repetition-code error detection."""

from . import bayes, fisher, oracle, protocols, signal, sweep
from .bayes import KERNEL
from .protocols import RunConfig, run
from .signal import CodeShape, DomainError, NoiseSpec

__version__ = "0.1.0"

__all__ = [
    "KERNEL",
    "CodeShape",
    "DomainError",
    "NoiseSpec",
    "RunConfig",
    "bayes",
    "fisher",
    "oracle",
    "protocols",
    "run",
    "signal",
    "sweep",
]
