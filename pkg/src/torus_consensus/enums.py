"""Enumeration type definitions"""

from enum import StrEnum


class Norm(StrEnum):
    """Neighborhood rule of a torus topology."""

    PER_AXIS = "peraxis"
    L1 = "l1"
    LINF = "linf"


class Method(StrEnum):
    CLOSED_FORM = "closed_form"
    ORACLE = "oracle"


class SweepVariable(StrEnum):
    N = "n"
    R = "r"
    M = "m"


class OutputFormat(StrEnum):
    CSV = "csv"
    JSON = "json"
