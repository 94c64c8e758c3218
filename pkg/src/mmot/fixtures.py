"""Built-in instances.

``COUNTEREXAMPLE`` is the published three-marginal, three-atom planar instance
without a Monge solution.  Coordinates are kept as the decimal strings they
were printed with and parsed on load.
"""

from __future__ import annotations

from .measures import Instance, make_instance

COUNTEREXAMPLE_COORDS = (
    (("0.4417", "-4.7665"), ("-0.27748", "1.0397"), ("1.4826", "4.7896")),
    (("-2.1054", "-3.9784"), ("3.5763", "-1.8988"), ("3.328", "-1.558")),
    (("-3.6728", "0.23451"), ("1.6988", "-2.2917"), ("-1.1644", "-2.386")),
)

# reported values (five significant figures)
COUNTEREXAMPLE_LP_VALUE = 68.027
COUNTEREXAMPLE_MMC = 68.065

# 1-based index tuples
COUNTEREXAMPLE_OPTIMAL_SUPPORT = ((1, 1, 3), (1, 2, 2), (2, 1, 1), (2, 2, 3), (3, 3, 1), (3, 3, 2))
COUNTEREXAMPLE_MONGE_SUPPORT = ((1, 1, 3), (2, 2, 2), (3, 3, 1))


def counterexample() -> Instance:
    return make_instance([[[float(v) for v in p] for p in mu] for mu in COUNTEREXAMPLE_COORDS])
