"""Hot-kernel dispatch: compiled extension when available, else pure Python.

Set PARITY_BPE_PURE=1 before import to force the pure-Python kernels.
Callers that want to stay switchable should call through this module
(``_kernels.merge_and_deltas(...)``) rather than importing the functions.
"""

import os

from . import _pure

try:
    from . import _speedups
except ImportError:
    _speedups = None

_FORCE_PURE = os.environ.get("PARITY_BPE_PURE") == "1"

BACKENDS = {"python": _pure}
if _speedups is not None:
    BACKENDS["c"] = _speedups

BACKEND = "python" if (_FORCE_PURE or _speedups is None) else "c"


def set_backend(name: str) -> None:
    """Switch the active kernel backend ("python" or "c") at runtime."""
    global BACKEND, count_pairs, merge_and_deltas, encode_ids
    if name not in BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {sorted(BACKENDS)}")
    impl = BACKENDS[name]
    BACKEND = name
    count_pairs = impl.count_pairs
    merge_and_deltas = impl.merge_and_deltas
    encode_ids = impl.encode_ids


set_backend(BACKEND)
