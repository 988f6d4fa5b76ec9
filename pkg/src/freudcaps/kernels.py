"""Kernel selection: compiled directed-rounding scan with pure-Python fallback.

The compiled extension is preferred; if it is unavailable (e.g. no C
toolchain at install time) the numpy fallback is used.  Both expose
``scan_envelope`` with identical semantics: passes are rigorous, failures
are conservative and re-examined at extended precision by the caller.
"""

from __future__ import annotations

try:
    from freudcaps._ksandwich import scan_envelope, IMPLEMENTATION
except ImportError:  # pragma: no cover - depends on build environment
    from freudcaps._ksandwich_py import scan_envelope, IMPLEMENTATION

from freudcaps import _ksandwich_py

__all__ = ["scan_envelope", "IMPLEMENTATION", "scan_envelope_fallback"]

scan_envelope_fallback = _ksandwich_py.scan_envelope
