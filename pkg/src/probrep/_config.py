"""Global numerical tolerances."""

from __future__ import annotations

import contextlib
import dataclasses
from typing import Iterator


@dataclasses.dataclass
class Tolerances:
    hermitian: float = 1e-12
    trace: float = 1e-12
    constraint: float = 1e-10
    assertion: float = 1e-9


TOL = Tolerances()


@contextlib.contextmanager
def tolerances(**overrides: float) -> Iterator[Tolerances]:
    """Temporarily override fields of the global :data:`TOL`."""
    saved = dataclasses.replace(TOL)
    for key, value in overrides.items():
        if not hasattr(TOL, key):
            raise AttributeError(f"unknown tolerance {key!r}")
        setattr(TOL, key, float(value))
    try:
        yield TOL
    finally:
        for field in dataclasses.fields(Tolerances):
            setattr(TOL, field.name, getattr(saved, field.name))
