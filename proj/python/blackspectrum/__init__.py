"""Membership inference attacks against black-box reasoning APIs."""

try:
    from ._blackspectrum import *  # noqa: F401,F403  (installed wheel layout)
    from ._blackspectrum import __version__  # noqa: F401
except ImportError:  # in-tree build: extension on PYTHONPATH next to this package
    from _blackspectrum import *  # noqa: F401,F403
    from _blackspectrum import __version__  # noqa: F401
