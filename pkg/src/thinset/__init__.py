"""Desk-scale computations for subgaussian, quasi-independent and Sidon sets."""

from .errors import ThinsetError
from .spectrum import FreqSet, GroupSpec, SampledFunction, TrigPoly, synth_eval

__version__ = "0.1.0"

__all__ = ["FreqSet", "GroupSpec", "SampledFunction", "ThinsetError", "TrigPoly", "synth_eval", "__version__"]
