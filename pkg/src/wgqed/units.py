"""Unit-suffixed quantity parsing.

Frequencies are stored internally as angular frequencies (rad/s).  Strings
like ``"0.5 kHz"`` are read as cyclic frequencies and multiplied by 2 pi;
``"3 rad/s"`` is taken as already angular.  Lengths, masses and times
accept the usual SI prefixes.
"""
from __future__ import annotations

import math
import re

_PREFIX = {"": 1.0, "m": 1e-3, "u": 1e-6, "µ": 1e-6, "n": 1e-9, "p": 1e-12,
           "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12}

_FREQ = {f"{p}Hz": v * 2 * math.pi for p, v in _PREFIX.items() if p not in ("m", "u", "µ", "n", "p")}
_FREQ.update({"mHz": 2 * math.pi * 1e-3, "rad/s": 1.0, "krad/s": 1e3, "Mrad/s": 1e6, "Grad/s": 1e9})

_UNITS = {
    "frequency": _FREQ,
    "length": {f"{p}m": v for p, v in _PREFIX.items()},
    "time": {f"{p}s": v for p, v in _PREFIX.items()},
    "mass": {"kg": 1.0, "g": 1e-3, "amu": 1.66053906660e-27, "u": 1.66053906660e-27},
    "effective_mass": {"s/m^2": 1.0, "s m^-2": 1.0},
    "dimensionless": {"": 1.0},
}

_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


class UnitError(ValueError):
    pass


def parse_quantity(value, kind: str = "frequency") -> float:
    """Convert ``value`` to internal units.

    Plain numbers pass through unchanged (already internal units).

    >>> round(parse_quantity("1 kHz"), 6)
    6283.185307
    >>> parse_quantity("2 rad/s")
    2.0
    """
    if isinstance(value, bool):
        raise UnitError(f"expected a {kind}, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise UnitError(f"expected a number or unit string, got {type(value).__name__}")
    m = _NUM.match(value)
    if not m:
        raise UnitError(f"cannot parse quantity {value!r}")
    number, unit = float(m.group(1)), m.group(2)
    table = _UNITS[kind]
    if unit not in table:
        raise UnitError(f"unknown {kind} unit {unit!r} in {value!r}; expected one of {sorted(table)}")
    return number * table[unit]


def format_frequency(w: float, unit: str = "Hz") -> str:
    """Angular frequency back to a cyclic-unit string."""
    return f"{w / _FREQ[unit]:.17g} {unit}"


def to_hz(w):
    """Angular frequency (rad/s) to cyclic frequency (Hz)."""
    return w / (2 * math.pi)
