from __future__ import annotations

from dataclasses import dataclass

from ..errors import DomainError


@dataclass(frozen=True)
class Tolerance:
    """Accuracy targets passed down to quadrature and Poisson series.

    ``tail_mass`` bounds the Poisson probability discarded when an
    infinite sum over counts is truncated.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    tail_mass: float = 1e-12

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "tail_mass"):
            value = getattr(self, name)
            if not value > 0:
                raise DomainError(f"{name} must be > 0, got {value!r}")

    def as_dict(self) -> dict:
        return {"abs_tol": self.abs_tol, "rel_tol": self.rel_tol, "tail_mass": self.tail_mass}


DEFAULT_TOLERANCE = Tolerance()
