"""kolmo: exact-arithmetic lab for prefix machines, algorithmic probability,
and interval codes.

Everything numeric is a dyadic rational or an exact fraction; there are
no floats anywhere in the package.
"""

__version__ = "0.1.0"

from .exact_arith import Dyadic, Interval, BinaryInterval  # noqa: F401
