"""Special functions behind every ISR series: log-Gamma, Riemann and Hurwitz zeta, omega.

``omega(z) = 3**-z * zeta(z) * (zeta(z, 1/3) - zeta(z, 2/3))`` is one sixth of the
Epstein zeta sum of the unit hexagonal lattice,
``sum over (u, v) != 0 of (u**2 + u*v + v**2) ** -z``.

The zeta functions use direct summation of the first ``N`` terms followed by an
Euler-Maclaurin tail.  ``N`` and the number of correction terms are picked
deterministically from the argument, so a given ``(z, a, accuracy)`` always goes
through the same arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import ConvergenceError, DomainError

__all__ = [
    "SpecFunAccuracy",
    "DEFAULT_ACCURACY",
    "gamma_ln",
    "riemann_zeta",
    "hurwitz_zeta",
    "omega",
    "dirichlet_l3",
]

# Euler-Maclaurin correction terms never go past B_{2 * _EM_MAX_ORDER}.
_EM_MAX_ORDER = 30


@dataclass(frozen=True)
class SpecFunAccuracy:
    """Accuracy policy for the zeta kernels.

    ``rel_tol`` is the target relative error, ``max_terms`` caps the number of
    directly summed terms before the Euler-Maclaurin tail takes over.
    """

    rel_tol: float = 1e-12
    max_terms: int = 100_000

    def __post_init__(self) -> None:
        if not 0.0 < self.rel_tol < 1.0:
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_terms < 10:
            raise DomainError(f"max_terms must be >= 10, got {self.max_terms}")


DEFAULT_ACCURACY = SpecFunAccuracy()


def gamma_ln(z: float) -> float:
    """Natural log of the Gamma function for ``z > 0``."""
    if not z > 0:
        raise DomainError(f"gamma_ln requires z > 0, got {z}")
    return math.lgamma(z)


@lru_cache(maxsize=None)
def _bernoulli_even() -> tuple[float, ...]:
    # Akiyama-Tanigawa; index j holds B_{2j} (B_0 = 1).
    n_max = 2 * _EM_MAX_ORDER
    a = [Fraction(0)] * (n_max + 1)
    out = []
    for m in range(n_max + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        if m % 2 == 0:
            out.append(a[0])
    return tuple(float(bn) for bn in out)


@lru_cache(maxsize=None)
def _em_coefficients() -> tuple[float, ...]:
    # B_{2j} / (2j)!, j = 1.._EM_MAX_ORDER
    bern = _bernoulli_even()
    return tuple(bern[j] / math.factorial(2 * j) for j in range(1, _EM_MAX_ORDER + 1))


def _direct_count(z: float) -> int:
    # Keeps (z + 2j) / (2 pi (N + a)) well below one for the correction orders used.
    return 10 + int(math.ceil(z / math.pi))


def _hurwitz_em(z: float, a: float, n_direct: int, rel_tol: float) -> float | None:
    """Euler-Maclaurin evaluation with ``n_direct`` explicit terms, or None if the tail fails."""
    head = math.fsum((n + a) ** -z for n in range(n_direct))
    big_n = n_direct + a
    base = big_n ** -z
    integral = big_n * base / (z - 1.0)
    approx = head + integral + 0.5 * base
    if base == 0.0:
        return approx
    corrections = []
    rising = z  # z (z+1) ... (z+2j-2)
    power = base / big_n  # big_n ** (-z - 2j + 1) for j = 1
    prev = math.inf
    for j, coef in enumerate(_em_coefficients(), start=1):
        term = coef * rising * power
        if abs(term) > prev:
            return None  # asymptotic series turned around before converging
        corrections.append(term)
        if abs(term) <= 0.1 * rel_tol * abs(approx):
            return approx + math.fsum(corrections)
        prev = abs(term)
        rising *= (z + 2 * j - 1) * (z + 2 * j)
        power /= big_n * big_n
    return None


def hurwitz_zeta(z: float, a: float, acc: SpecFunAccuracy = DEFAULT_ACCURACY) -> float:
    """Hurwitz zeta ``sum_{n>=0} (n + a) ** -z`` for ``z > 1`` and ``0 < a <= 1``."""
    if not z > 1.0:
        raise DomainError(f"hurwitz_zeta requires z > 1, got {z}")
    if not 0.0 < a <= 1.0:
        raise DomainError(f"hurwitz_zeta requires 0 < a <= 1, got {a}")
    n_direct = _direct_count(z)
    while n_direct <= acc.max_terms:
        value = _hurwitz_em(z, a, n_direct, acc.rel_tol)
        if value is not None:
            return value
        n_direct *= 2
    raise ConvergenceError(
        f"hurwitz_zeta({z}, {a}) did not reach rel_tol={acc.rel_tol} within {acc.max_terms} terms"
    )


def riemann_zeta(z: float, acc: SpecFunAccuracy = DEFAULT_ACCURACY) -> float:
    """Riemann zeta for real ``z > 1``; identical to ``hurwitz_zeta(z, 1)``."""
    if not z > 1.0:
        raise DomainError(f"riemann_zeta requires z > 1, got {z}")
    return hurwitz_zeta(z, 1.0, acc)


def dirichlet_l3(z: float, acc: SpecFunAccuracy = DEFAULT_ACCURACY) -> float:
    """``3**-z * (zeta(z, 1/3) - zeta(z, 2/3))``, the mod-3 Dirichlet L-series."""
    if not z > 1.0:
        raise DomainError(f"dirichlet_l3 requires z > 1, got {z}")
    if z > 300.0:
        # 3**z overflows past z ~ 646; here 1 - 2**-z + 4**-z is already exact in double.
        return 1.0 - 2.0 ** -z + 4.0 ** -z
    scale = 3.0 ** -z
    return scale * (hurwitz_zeta(z, 1.0 / 3.0, acc) - hurwitz_zeta(z, 2.0 / 3.0, acc))


def _hurwitz_any(z: float, a: float, acc: SpecFunAccuracy) -> float:
    # same scheme as hurwitz_zeta, for shifts a > 1 used internally
    n_direct = _direct_count(z)
    while n_direct <= acc.max_terms:
        value = _hurwitz_em(z, a, n_direct, acc.rel_tol)
        if value is not None:
            return value
        n_direct *= 2
    raise ConvergenceError(f"hurwitz sum ({z}, {a}) did not converge within {acc.max_terms} terms")


# Above this, omega is assembled as 1 + excess so that its rounding stays monotone.
_EXCESS_FROM = 10.0


def _omega_excess(z: float, acc: SpecFunAccuracy) -> float:
    """``omega(z) - 1`` from ``zeta(z) - 1 = zeta(z, 2)`` and
    ``L(z) - 1 = 3**-z (zeta(z, 4/3) - zeta(z, 2/3))``, with no cancellation against 1."""
    if z > 300.0:
        ez = 2.0 ** -z + 3.0 ** -z
        el = -(2.0 ** -z) + 4.0 ** -z
    else:
        ez = _hurwitz_any(z, 2.0, acc)
        el = 3.0 ** -z * (_hurwitz_any(z, 4.0 / 3.0, acc) - hurwitz_zeta(z, 2.0 / 3.0, acc))
    return ez + el + ez * el


@lru_cache(maxsize=65536)
def _omega_cached(z: float, rel_tol: float, max_terms: int) -> float:
    acc = SpecFunAccuracy(rel_tol, max_terms)
    if z >= _EXCESS_FROM:
        return 1.0 + _omega_excess(z, acc)
    return riemann_zeta(z, acc) * dirichlet_l3(z, acc)


def omega(z: float, acc: SpecFunAccuracy = DEFAULT_ACCURACY) -> float:
    """Hexagonal lattice function ``3**-z zeta(z) (zeta(z, 1/3) - zeta(z, 2/3))``.

    Memoized per ``(z, rel_tol, max_terms)``; ``6 * omega(z)`` is the lattice sum of
    ``|s|**(-2z)`` over the nonzero points of the unit hexagonal lattice.
    """
    if not z > 1.0:
        raise DomainError(f"omega requires z > 1, got {z}")
    return _omega_cached(float(z), acc.rel_tol, acc.max_terms)
