"""Finite-size expansion of dimer energy levels.

Every energy level of width ``N`` expands as

    E(D) = S/pi f_bulk(a) + f_bou(a)
           + sum_l (pi/S)^(2l+1) P_l(a) / ((2l+1)! 2^(l+2) (l+1)) I_{2l+1}(D)

with ``S = N + 1`` (``2L + 1`` for even ``N = 2L``, ``2L + 2`` for odd
``N = 2L + 1``).  The coefficient tables (Bernoulli values, sine-power Taylor
coefficients ``C[l][n]``, the polynomials ``P_l`` and the integrals of motion
``I_{2l+1}``) are exact rationals; mpmath enters only at evaluation.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .diagrams import Parity, TwoColumnDiagram, parity_of
from .errors import AccuracyError, DomainError, PrecisionError
from .spectrum import LatticeParams, energy, parse_alpha

FSC_DIGITS = 60
TABLE_LIMIT = 8


# --- exact tables ---------------------------------------------------------


@lru_cache(maxsize=None)
def bernoulli_number(n: int) -> Fraction:
    """``B_n`` with ``B_1 = -1/2``, from ``sum_{k<=n} binom(n+1, k) B_k = 0``."""
    if n < 0:
        raise DomainError(f"negative Bernoulli index {n}")
    if n == 0:
        return Fraction(1)
    acc = sum(math.comb(n + 1, k) * bernoulli_number(k) for k in range(n))
    return -acc / (n + 1)


def bernoulli(n: int, x=0) -> Fraction:
    """Bernoulli polynomial ``B_n(x)`` at a rational point (0 or 1/2 in practice)."""
    x = Fraction(x)
    return sum((math.comb(n, k) * bernoulli_number(k) * x ** (n - k) for k in range(n + 1)), Fraction(0))


def pochhammer(a, k: int) -> Fraction:
    a = Fraction(a)
    out = Fraction(1)
    for i in range(k):
        out *= a + i
    return out


@lru_cache(maxsize=None)
def sine_power_coefficient(l: int, n: int) -> int:
    """``C[l][n]``: ``sin(x)**(2n+1) = sum_{l>=n} C[l][n] x**(2l+1) / (2l+1)!``."""
    if n < 0 or l < 0:
        raise DomainError(f"negative index in C[{l}][{n}]")
    if n > l:
        return 0
    m = 2 * n + 1
    s = sum((-1) ** k * math.comb(m, k) * (2 * (k - n) - 1) ** (2 * l + 1) for k in range(m + 1))
    num = (-1) ** (l + n + 1) * s
    q, r = divmod(num, 2**m)
    assert r == 0, f"C[{l}][{n}] is not an integer"
    return q


def arcsinh_coefficient(k: int) -> Fraction:
    """Taylor coefficient of ``z**(2k+1)`` in ``arcsinh z``."""
    return (-1) ** k * pochhammer(Fraction(1, 2), k) / ((2 * k + 1) * math.factorial(k))


@lru_cache(maxsize=None)
def p_polynomial(l: int) -> tuple[Fraction, ...]:
    """Coefficients of ``P_l(alpha)`` by power of alpha, constant term first."""
    if l < 0:
        raise DomainError(f"negative order {l}")
    coeffs = [Fraction(0)] * (2 * l + 2)
    for k in range(l + 1):
        coeffs[2 * k + 1] = arcsinh_coefficient(k) * sine_power_coefficient(l, k)
    return tuple(coeffs)


def boundary_series_coefficients(k_max: int) -> list[Fraction]:
    """Coefficients of ``alpha**(2k+1)`` in ``f_bou`` for ``k = 0..k_max``."""
    return [arcsinh_coefficient(k) / 2 for k in range(k_max + 1)]


def bulk_series_coefficients(k_max: int) -> list[Fraction]:
    """Coefficients of ``alpha**(2k+1)`` in ``f_bulk``; ``int_0^{pi/2} sin^(2k+1) = (1)_k / (3/2)_k``."""
    return [
        -arcsinh_coefficient(k) * pochhammer(1, k) / pochhammer(Fraction(3, 2), k) for k in range(k_max + 1)
    ]


@dataclass(frozen=True)
class FscTable:
    l_max: int
    bernoulli_half: tuple[Fraction, ...]
    bernoulli_zero: tuple[Fraction, ...]
    C: tuple[tuple[int, ...], ...]
    P: tuple[tuple[Fraction, ...], ...]


@lru_cache(maxsize=None)
def build_table(l_max: int) -> FscTable:
    if l_max < 0:
        raise DomainError(f"negative l_max {l_max}")
    return FscTable(
        l_max=l_max,
        bernoulli_half=tuple(bernoulli(2 * l + 2, Fraction(1, 2)) for l in range(l_max + 1)),
        bernoulli_zero=tuple(bernoulli(2 * l + 2, 0) for l in range(l_max + 1)),
        C=tuple(tuple(sine_power_coefficient(l, n) for n in range(l + 1)) for l in range(l_max + 1)),
        P=tuple(p_polynomial(l) for l in range(l_max + 1)),
    )


def _check_parity(parity: str) -> None:
    if parity not in ("even", "odd"):
        raise DomainError(f"parity must be 'even' or 'odd', got {parity!r}")


def iom_eigenvalue(D: TwoColumnDiagram, l: int, parity: Parity) -> Fraction:
    """``I_{2l+1}(D)`` in the normalisation fixed by the finite-size expansion.

    Even width sums ``(2m - 1)**(2l+1)`` over the diagram and uses
    ``B_{2l+2}(1/2)``; odd width sums ``(2m)**(2l+1)`` and uses ``B_{2l+2}(0)``.
    """
    _check_parity(parity)
    if l < 0:
        raise DomainError(f"negative order {l}")
    p = 2 * l + 1
    if parity == "even":
        odd_sum = sum((2 * m - 1) ** p for m in D.entries())
        bern = bernoulli(2 * l + 2, Fraction(1, 2))
    else:
        odd_sum = sum((2 * m) ** p for m in D.entries())
        bern = bernoulli(2 * l + 2, 0)
    bracket = odd_sum + Fraction(2**p) * bern / (2 * l + 2)
    return Fraction(l + 1) * Fraction(2) ** (1 - l) * bracket


@dataclass(frozen=True)
class IomVector:
    diagram: TwoColumnDiagram
    parity: Parity
    values: tuple[Fraction, ...]


def iom_vector(D: TwoColumnDiagram, l_max: int, parity: Parity) -> IomVector:
    return IomVector(D, parity, tuple(iom_eigenvalue(D, l, parity) for l in range(l_max + 1)))


def correction_coefficient(l: int) -> Fraction:
    """``1 / ((2l+1)! 2^(l+2) (l+1))``."""
    return Fraction(1, math.factorial(2 * l + 1) * 2 ** (l + 2) * (l + 1))


# --- free energies --------------------------------------------------------


def _mpf(x) -> mpmath.mpf:
    x = parse_alpha(x)
    return mpmath.mpf(x.numerator) / x.denominator


@lru_cache(maxsize=64)
def _bulk_cached(alpha: Fraction, digits: int) -> mpmath.mpf:
    with mpmath.workdps(digits + 10):
        a = mpmath.mpf(alpha.numerator) / alpha.denominator
        val, err = mpmath.quad(
            lambda t: mpmath.asinh(a * mpmath.sin(t)), [0, mpmath.pi / 2], method="gauss-legendre", error=True
        )
        if err > mpmath.mpf(10) ** (-digits - 2):
            raise AccuracyError(f"f_bulk quadrature error {mpmath.nstr(err, 3)} above target 1e-{digits + 2}")
        return -val


def bulk_free_energy(alpha, digits: int = FSC_DIGITS) -> mpmath.mpf:
    """``-int_0^{pi/2} arcsinh(alpha sin t) dt`` by Gauss-Legendre with degree doubling."""
    a = parse_alpha(alpha)
    if a == 0:
        return mpmath.mpf(0)
    return _bulk_cached(a, digits)


def bulk_free_energy_series(alpha, digits: int = FSC_DIGITS) -> mpmath.mpf:
    """Power-series value of ``f_bulk`` (convergent for ``alpha < 1``)."""
    a = parse_alpha(alpha)
    if a >= 1:
        raise DomainError("power series for f_bulk needs alpha < 1")
    with mpmath.workdps(digits + 10):
        x = mpmath.mpf(a.numerator) / a.denominator
        eps = mpmath.mpf(10) ** (-digits - 5)
        total, k = mpmath.mpf(0), 0
        while True:
            c = -arcsinh_coefficient(k) * pochhammer(1, k) / pochhammer(Fraction(3, 2), k)
            term = mpmath.mpf(c.numerator) / c.denominator * x ** (2 * k + 1)
            total += term
            if abs(term) < eps and k > 2:
                break
            k += 1
        return total


def boundary_free_energy(alpha, digits: int = FSC_DIGITS) -> mpmath.mpf:
    with mpmath.workdps(digits + 10):
        return mpmath.asinh(_mpf(alpha)) / 2


# --- expansion ------------------------------------------------------------


def _scale(N: int) -> int:
    # 2L + 1 for N = 2L, 2L + 2 for N = 2L + 1
    return N + 1


def fsc_energy(params: LatticeParams, D: TwoColumnDiagram, l_max: int) -> mpmath.mpf:
    """Bulk + boundary + corrections through order ``(pi/S)**(2 l_max + 1)``."""
    if D.max_height != params.L:
        raise DomainError(f"diagram height {D.max_height} does not match N={params.N}")
    if l_max < 0:
        raise DomainError(f"negative l_max {l_max}")
    if params.alpha == 0:
        return mpmath.mpf(0)
    digits = params.precision_digits
    parity = parity_of(params.N)
    S = _scale(params.N)
    with mpmath.workdps(digits + 10):
        a = params.alpha_mpf()
        h = mpmath.pi / S
        total = S / mpmath.pi * bulk_free_energy(params.alpha, digits) + boundary_free_energy(params.alpha, digits)
        for l in range(l_max + 1):
            P = p_polynomial(l)
            p_val = mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * a**k for k, c in enumerate(P) if c)
            rational = correction_coefficient(l) * iom_eigenvalue(D, l, parity)
            total += h ** (2 * l + 1) * p_val * mpmath.mpf(rational.numerator) / rational.denominator
    with mpmath.workdps(digits):
        return +total


def sine_power_sum_check(L: int, k: int, l_trunc: int, parity: Parity, digits: int = FSC_DIGITS) -> mpmath.mpf:
    """Residual of the truncated sine-power sum identity.

    Returns ``sum_{m=1}^L sin^(2k+1)(x_m)`` minus
    ``S/pi (1)_k/(3/2)_k - 1/2 - sum_{l=k}^{l_trunc} (pi/S)^(2l+1) B_{2l+2}(x0)/(2l+2)! C[l][k]``.
    """
    _check_parity(parity)
    if L < 1 or k < 0 or k > l_trunc:
        raise DomainError(f"need L >= 1 and 0 <= k <= l_trunc, got L={L}, k={k}, l_trunc={l_trunc}")
    with mpmath.workdps(digits + 10):
        if parity == "even":
            S, x0 = 2 * L + 1, Fraction(1, 2)
            xs = [mpmath.pi * (2 * m - 1) / (2 * S) for m in range(1, L + 1)]
        else:
            S, x0 = 2 * L + 2, Fraction(0)
            xs = [mpmath.pi * m / S for m in range(1, L + 1)]
        lhs = mpmath.fsum(mpmath.sin(x) ** (2 * k + 1) for x in xs)
        ratio = pochhammer(1, k) / pochhammer(Fraction(3, 2), k)
        rhs = S / mpmath.pi * mpmath.mpf(ratio.numerator) / ratio.denominator - mpmath.mpf(1) / 2
        h = mpmath.pi / S
        for l in range(k, l_trunc + 1):
            c = bernoulli(2 * l + 2, x0) / math.factorial(2 * l + 2) * sine_power_coefficient(l, k)
            rhs -= h ** (2 * l + 1) * mpmath.mpf(c.numerator) / c.denominator
        res = lhs - rhs
    with mpmath.workdps(digits):
        return +res


@dataclass(frozen=True)
class FitResult:
    slope: float
    expected_slope: int
    sizes: tuple[int, ...]
    residuals: tuple[mpmath.mpf, ...]
    digits: int


def _validate_grid(sizes: Sequence[int]) -> tuple[int, ...]:
    sizes = tuple(sorted(set(int(n) for n in sizes)))
    if len(sizes) < 5:
        raise DomainError(f"need at least 5 distinct sizes, got {len(sizes)}")
    if len({n % 2 for n in sizes}) != 1:
        raise DomainError("all sizes in a fit grid must share parity")
    if sizes[0] < 1:
        raise DomainError("sizes must be positive")
    return sizes


def residual_order_fit(
    sizes: Sequence[int], D: TwoColumnDiagram, alpha, l_max: int, digits: int = FSC_DIGITS
) -> FitResult:
    """Least-squares slope of ``log|energy - fsc_energy|`` against ``log N``.

    ``D`` is re-heighted to ``N // 2`` for each size.  A residual within a few
    ulps of the working precision raises ``PrecisionError``.
    """
    sizes = _validate_grid(sizes)
    residuals = []
    for N in sizes:
        params = LatticeParams(N, alpha, digits)
        Dn = D.with_height(params.L)
        e = energy(params, Dn)
        with mpmath.workdps(digits):
            r = abs(e - fsc_energy(params, Dn, l_max))
            floor = mpmath.mpf(10) ** (5 - digits) * max(1, abs(e))
        if r < floor:
            raise PrecisionError(
                f"residual {mpmath.nstr(r, 3)} at N={N} is at the precision floor of {digits} digits; raise --digits"
            )
        residuals.append(r)
    x = np.log(np.array(sizes, dtype=float))
    y = np.array([float(mpmath.log(r)) for r in residuals])
    slope = float(np.polyfit(x, y, 1)[0])
    return FitResult(slope, -(2 * l_max + 3), sizes, tuple(residuals), digits)


def expansion_coefficients(
    D: TwoColumnDiagram, alpha, sizes: Sequence[int], digits: int = 100
) -> list[mpmath.mpf]:
    """Numerically extracted coefficients of ``h**(2l+1)`` in ``energy(D)``, ``h = pi/(N+1)``.

    Solves the square linear system ``E(N) = b/h + c + sum_l x_l h**(2l+1)``
    over the given sizes (same parity); uses no knowledge of the exact
    correction coefficients.  Returns ``[x_0, x_1, ...]``.
    """
    sizes = tuple(sorted(set(int(n) for n in sizes)))
    if len({n % 2 for n in sizes}) != 1:
        raise DomainError("all sizes must share parity")
    k = len(sizes) - 2
    if k < 1:
        raise DomainError("need at least 3 sizes")
    with mpmath.workdps(digits + 20):
        rows, rhs = [], []
        for N in sizes:
            params = LatticeParams(N, alpha, digits + 20)
            h = mpmath.pi / (N + 1)
            rows.append([1 / h, mpmath.mpf(1)] + [h ** (2 * l + 1) for l in range(k)])
            rhs.append(energy(params, D.with_height(params.L)))
        sol = mpmath.lu_solve(mpmath.matrix(rows), mpmath.matrix(rhs))
        return [sol[2 + l] for l in range(k)]
