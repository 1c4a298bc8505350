"""Sparse-array FMCW MIMO radar imaging chain.

Submodules: geometry, synthesis, rdproc, features, doa, nn, evaluation, io,
backend, cli. This file stays import-light so the CLI can configure BLAS
thread counts before NumPy loads.
"""

__version__ = "0.1.0"

_SUBMODULES = (
    "backend",
    "cli",
    "doa",
    "evaluation",
    "features",
    "geometry",
    "io",
    "nn",
    "rdproc",
    "synthesis",
)


def __getattr__(name):
    if name in _SUBMODULES:
        import importlib

        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
