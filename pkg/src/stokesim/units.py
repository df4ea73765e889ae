"""Unit-suffixed quantities and physical constants.

Config files state every dimensioned number as ``"<value> <unit>"``
(for example ``fwhm = "100 um"``).  Parsing converts to SI; formatting
emits the canonical base unit so serialize/parse round-trips exactly.
"""

from __future__ import annotations

import math

# CODATA 2018 exact values
BOLTZMANN = 1.380649e-23  # J/K
ATOMIC_MASS_UNIT = 1.66053906892e-27  # kg

RB87_MASS = 86.909180527 * ATOMIC_MASS_UNIT  # kg
D2_WAVEVECTOR = 2.0 * math.pi / 780e-9  # rad/m, rubidium D2 line

_UNIT_TABLES: dict[str, dict[str, float]] = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9},
    "rate": {"1/s": 1.0, "1/ms": 1e3, "1/us": 1e6, "Hz": 1.0, "kHz": 1e3, "MHz": 1e6},
    "angular_frequency": {"rad/s": 1.0, "krad/s": 1e3, "Mrad/s": 1e6, "Grad/s": 1e9},
    "angle": {"rad": 1.0, "mrad": 1e-3, "deg": math.pi / 180.0},
    "wavevector": {"rad/m": 1.0, "1/m": 1.0, "rad/mm": 1e3, "rad/um": 1e6},
    "temperature": {"K": 1.0, "mK": 1e-3, "uK": 1e-6, "nK": 1e-9},
    "mass": {"kg": 1.0, "u": ATOMIC_MASS_UNIT, "amu": ATOMIC_MASS_UNIT},
    "gradient": {"rad/(s*m)": 1.0, "rad/s/m": 1.0},
}

_BASE_UNIT = {
    "length": "m",
    "time": "s",
    "rate": "1/s",
    "angular_frequency": "rad/s",
    "angle": "rad",
    "wavevector": "rad/m",
    "temperature": "K",
    "mass": "kg",
    "gradient": "rad/(s*m)",
}


def parse_quantity(text: str | float | int, dimension: str) -> float:
    """Convert ``"100 um"`` style text to an SI float of the given dimension.

    Bare numbers are rejected for dimensioned quantities: the file format
    requires an explicit unit on every physical value.
    """
    table = _UNIT_TABLES.get(dimension)
    if table is None:
        raise ValueError(f"unknown dimension {dimension!r}")
    if isinstance(text, (int, float)):
        raise ValueError(
            f"expected a unit-suffixed string for a {dimension} "
            f'(e.g. "1.0 {_BASE_UNIT[dimension]}"), got bare number {text!r}'
        )
    parts = text.strip().split()
    if len(parts) != 2:
        raise ValueError(
            f"malformed quantity {text!r}: expected '<value> <unit>'"
        )
    raw, unit = parts
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"malformed number {raw!r} in quantity {text!r}") from None
    if unit not in table:
        known = ", ".join(sorted(table))
        raise ValueError(
            f"unit {unit!r} is not a {dimension} unit (expected one of: {known})"
        )
    return value * table[unit]


def format_quantity(value: float, dimension: str) -> str:
    """Render an SI value in its canonical base unit with full precision."""
    return f"{value!r} {_BASE_UNIT[dimension]}"
