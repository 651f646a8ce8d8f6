"""Truncation policy and summation driver shared by every ISR series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import ConvergenceError, DomainError

__all__ = ["SeriesControl", "DEFAULT_SERIES", "sum_series", "log_pow"]

MIN_TERMS = 5


@dataclass(frozen=True)
class SeriesControl:
    """When to stop summing a nonnegative series over ``h = 0, 1, ...``.

    Summation stops at the first ``h >= 5`` whose term is below ``rel_stop`` times
    the running sum.  At most ``h_max + 1`` terms are used.  With ``strict`` the
    cap is an error; otherwise the partial sum at ``h_max`` is returned, which is
    what truncation-stability checks compare.
    """

    h_max: int = 500
    rel_stop: float = 1e-14
    strict: bool = True

    def __post_init__(self) -> None:
        if self.h_max < MIN_TERMS:
            raise DomainError(f"h_max must be >= {MIN_TERMS}, got {self.h_max}")
        if not 0.0 < self.rel_stop < 1.0:
            raise DomainError(f"rel_stop must lie in (0, 1), got {self.rel_stop}")


DEFAULT_SERIES = SeriesControl()


def log_pow(base: float, exponent: float) -> float:
    """``log(base ** exponent)`` with ``0 ** 0 = 1``; ``-inf`` for a zero base."""
    if exponent == 0:
        return 0.0
    if base == 0.0:
        return -math.inf
    return exponent * math.log(base)


def sum_series(term: Callable[[int], float], sc: SeriesControl, name: str = "series") -> float:
    terms: list[float] = []
    partial = 0.0
    for h in range(sc.h_max + 1):
        t = term(h)
        if not t >= 0.0:
            raise ArithmeticError(f"{name}: term {h} is {t}, expected a nonnegative value")
        terms.append(t)
        partial += t
        if h >= MIN_TERMS and t <= sc.rel_stop * partial:
            return math.fsum(terms)
    if sc.strict:
        raise ConvergenceError(
            f"{name} not converged after h_max={sc.h_max} terms "
            f"(last term / sum = {terms[-1] / partial if partial else float('nan'):.3e})"
        )
    return math.fsum(terms)
