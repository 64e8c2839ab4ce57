"""Concatenated-OMARS screening designs.

Construct three-level screening designs by folding conference designs into
definitive-screening-design bodies and concatenating two of them with center
runs, then minimize the aliasing among second-order effects with a CC/VNS
metaheuristic.  Empirical diagnostics are cross-checked against closed-form
values throughout.
"""

__version__ = "0.1.0"

from . import analytic, designs, errors, metrics, optimizer

__all__ = ["analytic", "designs", "errors", "metrics", "optimizer", "__version__"]
