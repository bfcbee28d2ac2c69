"""Quadratic BSDE laboratory: python facade over the C++ core."""

try:
    from qbsde._core import *  # noqa: F401,F403
    from qbsde._core import __version__  # noqa: F401
except ImportError:  # development tree: module built next to the package
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
