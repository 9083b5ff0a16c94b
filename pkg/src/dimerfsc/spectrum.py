"""Transfer-matrix eigenvalues from the free-fermion product formula.

For width ``N`` with ``L = N // 2`` modes the eigenvalues of ``T**2`` are

    lambda(D) = prod_j (sqrt(1 + a^2 sin^2 t_j) + a sin t_j) ** (2 (1 - eps_j - mu_j))

with ``t_j = pi (2j - 1) / (2 (N + 1))`` for even ``N`` and ``t_j = pi j / (N + 1)``
for odd ``N``.  Energies are ``-log(lambda) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .diagrams import TwoColumnDiagram, as_sector_label, enumerate_sector
from .errors import DomainError

DEFAULT_DIGITS = 15


def parse_alpha(alpha) -> Fraction:
    """Exact rational value of a horizontal weight given as int, str, float or Fraction."""
    if isinstance(alpha, Fraction):
        value = alpha
    elif isinstance(alpha, (int, float)):
        value = Fraction(alpha)
    elif isinstance(alpha, str):
        try:
            value = Fraction(alpha.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse alpha={alpha!r}") from exc
    elif isinstance(alpha, mpmath.mpf):
        man, exp = alpha.man_exp
        value = Fraction(man) * Fraction(2) ** exp
    else:
        raise DomainError(f"unsupported alpha type {type(alpha).__name__}")
    if value < 0:
        raise DomainError(f"alpha must be nonnegative, got {value}")
    return value


@dataclass(frozen=True)
class LatticeParams:
    N: int
    alpha: Fraction
    precision_digits: int = DEFAULT_DIGITS

    def __init__(self, N: int, alpha=1, precision_digits: int = DEFAULT_DIGITS):
        if N < 1:
            raise DomainError(f"N must be >= 1, got {N}")
        if precision_digits < 15:
            raise DomainError(f"precision_digits must be >= 15, got {precision_digits}")
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "alpha", parse_alpha(alpha))
        object.__setattr__(self, "precision_digits", int(precision_digits))

    @property
    def L(self) -> int:
        return self.N // 2

    @property
    def parity(self) -> str:
        return "even" if self.N % 2 == 0 else "odd"

    def alpha_mpf(self) -> mpmath.mpf:
        # call inside a workdps block
        return mpmath.mpf(self.alpha.numerator) / self.alpha.denominator


@dataclass(frozen=True)
class SpectralPoint:
    diagram: TwoColumnDiagram
    lam: mpmath.mpf
    energy: mpmath.mpf


def momentum_angles(N: int) -> list[mpmath.mpf]:
    """Mode angles at the current mpmath precision, increasing, in ``(0, pi/2)``."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    L = N // 2
    if N % 2 == 0:
        return [mpmath.pi * (2 * j - 1) / (2 * (N + 1)) for j in range(1, L + 1)]
    return [mpmath.pi * j / (N + 1) for j in range(1, L + 1)]


@lru_cache(maxsize=256)
def _mode_table(N: int, alpha: Fraction, dps: int) -> tuple[tuple[mpmath.mpf, ...], tuple[mpmath.mpf, ...]]:
    """Per-mode ``(sqrt(1 + x^2) + x, arcsinh x)`` with ``x = alpha sin t_j``."""
    with mpmath.workdps(dps + 10):
        a = mpmath.mpf(alpha.numerator) / alpha.denominator
        xs = [a * mpmath.sin(t) for t in momentum_angles(N)]
        bases = tuple(mpmath.sqrt(1 + x * x) + x for x in xs)
        logs = tuple(mpmath.asinh(x) for x in xs)
    return bases, logs


def _check_height(params: LatticeParams, D: TwoColumnDiagram) -> None:
    if D.max_height != params.L:
        raise DomainError(f"diagram height {D.max_height} does not match N={params.N} (L={params.L})")


def eigenvalue(params: LatticeParams, D: TwoColumnDiagram) -> mpmath.mpf:
    _check_height(params, D)
    bases, _ = _mode_table(params.N, params.alpha, params.precision_digits)
    with mpmath.workdps(params.precision_digits + 10):
        lam = mpmath.mpf(1)
        for base, n in zip(bases, D.multiplicities()):
            lam *= base ** (2 * (1 - n))
    with mpmath.workdps(params.precision_digits):
        return +lam


def energy(params: LatticeParams, D: TwoColumnDiagram) -> mpmath.mpf:
    """``sum_{k in D} arcsinh(a sin t_k) - sum_{k=1..L} arcsinh(a sin t_k)``."""
    _check_height(params, D)
    _, logs = _mode_table(params.N, params.alpha, params.precision_digits)
    with mpmath.workdps(params.precision_digits + 10):
        e = mpmath.fsum(logs[k - 1] for k in D.entries()) - mpmath.fsum(logs)
    with mpmath.workdps(params.precision_digits):
        return +e


def spectral_point(params: LatticeParams, D: TwoColumnDiagram) -> SpectralPoint:
    return SpectralPoint(D, eigenvalue(params, D), energy(params, D))


def sector_diagrams(N: int, v) -> list[TwoColumnDiagram]:
    """Diagrams labelling the ``T**2`` eigenvalues in sector ``E_v``.

    Even ``N``: variation index equal to ``v``.  Odd ``N``: excess parameter
    ``w = v - 1/2`` or ``w = v + 1/2``.
    """
    v = as_sector_label(N, v)
    L = N // 2
    if abs(v) > Fraction(N, 2):
        raise DomainError(f"|v|={abs(v)} exceeds N/2 for N={N}")
    if N % 2 == 0:
        return enumerate_sector(L, int(v))
    lo, hi = int(v - Fraction(1, 2)), int(v + Fraction(1, 2))
    return sorted(enumerate_sector(L, lo) + enumerate_sector(L, hi))


def sector_spectrum(params: LatticeParams, v) -> list[SpectralPoint]:
    """Spectral points of sector ``v`` sorted by descending eigenvalue."""
    points = [spectral_point(params, D) for D in sector_diagrams(params.N, v)]
    # stable sort keeps diagram order among degenerate eigenvalues
    points.sort(key=lambda p: -p.lam)
    return points


def sector_labels(N: int) -> list[Fraction]:
    """All admissible ``v`` for width ``N``, ascending."""
    return [Fraction(N - 2 * k, 2) for k in range(N, -1, -1)]
