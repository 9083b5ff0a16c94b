"""Finitized sector partition functions and characters as exact q-series.

Exponents live on the grid ``q**(1/24)``: ``-c/24 = 1/12`` for ``c = -2``,
Kac weights have denominator 8 and diagram levels are half-integers, so every
exponent met here is a multiple of 1/24.  ``q`` is a formal variable.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .diagrams import conformal_exponent, enumerate_sector, sector_dimension
from .errors import DomainError

GRAIN = 24
CENTRAL_CHARGE = Fraction(-2)


def to_grain(exponent) -> int:
    """Exponent of q as an integer number of ``q**(1/24)`` steps."""
    g = Fraction(exponent) * GRAIN
    if g.denominator != 1:
        raise DomainError(f"exponent {exponent} is not on the 1/{GRAIN} grid")
    return int(g)


@dataclass(frozen=True)
class RationalQSeries:
    """``q**(offset/24) * sum_k coeffs[k] q**(k/24)``, known below ``truncation``.

    ``truncation`` is the first unknown grain exponent, or None for an exact
    (polynomial) series.
    """

    offset: int
    coeffs: tuple[Fraction, ...]
    truncation: int | None = None

    def __post_init__(self) -> None:
        coeffs = [Fraction(c) for c in self.coeffs]
        offset = self.offset
        if self.truncation is not None:
            coeffs = coeffs[: max(0, self.truncation - offset)]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        lead = 0
        while lead < len(coeffs) and coeffs[lead] == 0:
            lead += 1
        if lead == len(coeffs):
            coeffs, offset = [], 0
        else:
            coeffs, offset = coeffs[lead:], offset + lead
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "offset", offset)

    # -- construction --
    @classmethod
    def zero(cls) -> RationalQSeries:
        return cls(0, ())

    @classmethod
    def monomial(cls, exponent, coeff=1) -> RationalQSeries:
        return cls(to_grain(exponent), (Fraction(coeff),))

    @classmethod
    def from_terms(cls, terms: dict) -> RationalQSeries:
        """Exact series from ``{exponent of q: coefficient}``."""
        if not terms:
            return cls.zero()
        grains = {to_grain(e): Fraction(c) for e, c in terms.items()}
        lo = min(grains)
        dense = [Fraction(0)] * (max(grains) - lo + 1)
        for g, c in grains.items():
            dense[g - lo] += c
        return cls(lo, tuple(dense))

    @classmethod
    def from_q_poly(cls, coeffs: Sequence, exponent_shift=0, truncation_q: int | None = None) -> RationalQSeries:
        """Series from coefficients of integer powers ``q**0, q**1, ...`` times ``q**exponent_shift``."""
        shift = to_grain(exponent_shift)
        dense = [Fraction(0)] * (GRAIN * (len(coeffs) - 1) + 1) if coeffs else []
        for k, c in enumerate(coeffs):
            dense[GRAIN * k] = Fraction(c)
        trunc = None if truncation_q is None else shift + GRAIN * truncation_q
        return cls(shift, tuple(dense), trunc)

    # -- access --
    def terms(self) -> dict[Fraction, Fraction]:
        """Nonzero coefficients keyed by the (rational) exponent of q."""
        return {Fraction(self.offset + k, GRAIN): c for k, c in enumerate(self.coeffs) if c}

    def coefficient(self, exponent) -> Fraction:
        g = to_grain(exponent)
        if self.truncation is not None and g >= self.truncation:
            raise DomainError(f"coefficient of q^{exponent} lies beyond the truncation order")
        k = g - self.offset
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def at_one(self) -> Fraction:
        """Value at ``q = 1`` (exact series only)."""
        if self.truncation is not None:
            raise DomainError("cannot evaluate a truncated series at q = 1")
        return sum(self.coeffs, Fraction(0))

    def has_integer_coefficients(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    # -- arithmetic --
    def _reach(self) -> float:
        return float("inf") if self.truncation is None else self.truncation

    def __add__(self, other: RationalQSeries) -> RationalQSeries:
        offsets = [s.offset for s in (self, other) if s.coeffs] or [0]
        lo = min(offsets)
        hi = max(self.offset + len(self.coeffs), other.offset + len(other.coeffs), lo)
        dense = [Fraction(0)] * (hi - lo)
        for s in (self, other):
            for k, c in enumerate(s.coeffs):
                dense[s.offset - lo + k] += c
        reach = min(self._reach(), other._reach())
        return RationalQSeries(lo, tuple(dense), None if reach == float("inf") else int(reach))

    def __neg__(self) -> RationalQSeries:
        return RationalQSeries(self.offset, tuple(-c for c in self.coeffs), self.truncation)

    def __sub__(self, other: RationalQSeries) -> RationalQSeries:
        return self + (-other)

    def scale(self, factor) -> RationalQSeries:
        return RationalQSeries(self.offset, tuple(Fraction(factor) * c for c in self.coeffs), self.truncation)

    def shift(self, exponent) -> RationalQSeries:
        g = to_grain(exponent)
        trunc = None if self.truncation is None else self.truncation + g
        return RationalQSeries(self.offset + g, self.coeffs, trunc)

    def __mul__(self, other: RationalQSeries) -> RationalQSeries:
        if not self.coeffs or not other.coeffs:
            reach = self._mul_reach(other)
            return RationalQSeries(0, (), reach)
        dense = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        nz = [(j, b) for j, b in enumerate(other.coeffs) if b]
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in nz:
                    dense[i + j] += a * b
        return RationalQSeries(self.offset + other.offset, tuple(dense), self._mul_reach(other))

    def _mul_reach(self, other: RationalQSeries) -> int | None:
        # a truncated factor is known up to its reach; the product is known up to
        # that reach shifted by the other factor's lowest exponent
        cands = []
        if self.truncation is not None:
            cands.append(self.truncation + (other.offset if other.coeffs else 0))
        if other.truncation is not None:
            cands.append(other.truncation + (self.offset if self.coeffs else 0))
        return min(cands) if cands else None

    def divide_exact(self, divisor: RationalQSeries) -> RationalQSeries:
        """Exact polynomial division; raises ``DomainError`` on a nonzero remainder."""
        if self.truncation is not None or divisor.truncation is not None:
            raise DomainError("exact division needs exact series")
        if divisor.is_zero():
            raise DomainError("division by zero series")
        if self.is_zero():
            return RationalQSeries.zero()
        rem = list(self.coeffs)
        d = divisor.coeffs
        n_q = len(rem) - len(d) + 1
        if n_q <= 0:
            raise DomainError("division leaves a nonzero remainder")
        quot = [Fraction(0)] * n_q
        nz = [(j, dj) for j, dj in enumerate(d) if dj]
        for i in range(n_q):
            if not rem[i]:
                continue
            c = rem[i] / d[0]
            quot[i] = c
            for j, dj in nz:
                rem[i + j] -= c * dj
        if any(rem):
            raise DomainError("division leaves a nonzero remainder")
        return RationalQSeries(self.offset - divisor.offset, tuple(quot))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalQSeries):
            return NotImplemented
        return (self.offset, self.coeffs, self.truncation) == (other.offset, other.coeffs, other.truncation)

    def __hash__(self) -> int:
        return hash((self.offset, self.coeffs, self.truncation))

    def __str__(self) -> str:
        if not self.coeffs:
            body = "0"
        else:
            parts = []
            for e, c in self.terms().items():
                parts.append(f"{c}*q^({e})")
            body = " + ".join(parts)
        return body if self.truncation is None else f"{body} + O(q^({Fraction(self.truncation, GRAIN)}))"


# --- building blocks ------------------------------------------------------


def kac_weight(r: int, s: int) -> Fraction:
    if r < 1 or s < 1:
        raise DomainError(f"Kac labels must be positive, got ({r}, {s})")
    return Fraction((2 * r - s) ** 2 - 1, 8)


@lru_cache(maxsize=None)
def _q_binomial_coeffs(a: int, b: int) -> tuple[int, ...]:
    if b < 0 or b > a:
        return ()
    if b == 0 or b == a:
        return (1,)
    # [a, b] = [a-1, b-1] + q^b [a-1, b]
    left = _q_binomial_coeffs(a - 1, b - 1)
    right = _q_binomial_coeffs(a - 1, b)
    out = [0] * (b * (a - b) + 1)
    for k, c in enumerate(left):
        out[k] += c
    for k, c in enumerate(right):
        out[k + b] += c
    return tuple(out)


def q_binomial(a: int, b: int) -> RationalQSeries:
    """Gaussian binomial ``[a choose b]_q`` (zero outside ``0 <= b <= a``)."""
    if a < 0:
        raise DomainError(f"negative top entry {a}")
    return RationalQSeries.from_q_poly(_q_binomial_coeffs(a, b))


def _one_minus_q_power(n: int) -> RationalQSeries:
    return RationalQSeries.from_q_poly([1] + [0] * (n - 1) + [-1])


def _vacuum_shift() -> Fraction:
    return -CENTRAL_CHARGE / 24


def _half(v) -> Fraction:
    v = Fraction(v)
    if v.denominator != 2:
        raise DomainError(f"odd-width sector label must be a half-integer, got {v}")
    return v


# --- sector partition functions -------------------------------------------


def sector_partition_even(L: int, v: int) -> RationalQSeries:
    """``q^(-c/24 - 1/8) sum_{D in U_v} q^(sum_j (j - 1/2))`` from diagram enumeration."""
    if abs(v) > L:
        raise DomainError(f"|v|={abs(v)} exceeds L={L}")
    pre = _vacuum_shift() - Fraction(1, 8)
    levels = Counter(pre + conformal_exponent(D, "even") for D in enumerate_sector(L, v))
    return RationalQSeries.from_terms(levels)


def sector_partition_even_closed(L: int, v: int) -> RationalQSeries:
    if abs(v) > L:
        raise DomainError(f"|v|={abs(v)} exceeds L={L}")
    return q_binomial(2 * L, L - v).shift(_vacuum_shift() + kac_weight(abs(v) + 1, 2))


def sector_partition_odd(L: int, v) -> RationalQSeries:
    """``q^(-c/24) sum_{D in U_{v-1/2} + U_{v+1/2}} q^(sum_j j)``."""
    v = _half(v)
    if abs(v) > L + Fraction(1, 2):
        raise DomainError(f"|v|={abs(v)} exceeds L+1/2 for L={L}")
    levels: Counter = Counter()
    for w in (v - Fraction(1, 2), v + Fraction(1, 2)):
        levels.update(_vacuum_shift() + conformal_exponent(D, "odd") for D in enumerate_sector(L, int(w)))
    return RationalQSeries.from_terms(levels)


def sector_partition_odd_closed(L: int, v) -> RationalQSeries:
    v = _half(v)
    if abs(v) > L + Fraction(1, 2):
        raise DomainError(f"|v|={abs(v)} exceeds L+1/2 for L={L}")
    bottom = L + Fraction(1, 2) - v
    return q_binomial(2 * L + 1, int(bottom)).shift(_vacuum_shift() + kac_weight(int(abs(v) + Fraction(1, 2)), 1))


def sector_partition(N: int, v, closed: bool = False) -> RationalQSeries:
    L = N // 2
    if N % 2 == 0:
        v = Fraction(v)
        if v.denominator != 1:
            raise DomainError(f"even-width sector label must be an integer, got {v}")
        return (sector_partition_even_closed if closed else sector_partition_even)(L, int(v))
    return (sector_partition_odd_closed if closed else sector_partition_odd)(L, v)


# --- characters -----------------------------------------------------------


def finitized_character(r: int, s: int, N: int) -> RationalQSeries:
    """Finitized irreducible character ``ch_{r,s}^{(N+1)}`` for width ``N``.

    ``s = 2`` (even ``N``): ``q^(-c/24 + D_{r,2}) (1 - q^(2r)) / (1 - q^(N+2)) [N+2, N/2 - r + 1]``.
    ``s = 1`` (odd ``N``): ``q^(-c/24 + D_{r,1}) (1 - q^r) / (1 - q^((N+1)/2)) [N+1, (N+1)/2 - r]``.
    Raises ``DomainError`` when the quotient is not a polynomial.
    """
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    if s == 2:
        if N % 2:
            raise DomainError("s=2 characters belong to even widths")
        num = _one_minus_q_power(2 * r) * q_binomial(N + 2, N // 2 - r + 1)
        den = _one_minus_q_power(N + 2)
    elif s == 1:
        if N % 2 == 0:
            raise DomainError("s=1 characters belong to odd widths")
        num = _one_minus_q_power(r) * q_binomial(N + 1, (N + 1) // 2 - r)
        den = _one_minus_q_power((N + 1) // 2)
    else:
        raise DomainError(f"s must be 1 or 2, got {s}")
    return num.divide_exact(den).shift(_vacuum_shift() + kac_weight(r, s))


@dataclass(frozen=True)
class IdentityWitness:
    holds: bool
    L: int
    v: Fraction
    parity: str
    r_values: tuple[int, ...]
    enumeration_equals_closed: bool
    closed_equals_characters: bool
    dimension_matches: bool


def character_sum_upper_limit(L: int, v, parity: str) -> int:
    """Largest ``r`` in the character sum: same parity as ``|v| + 1`` and ``<= L + 1`` (even width); ``L + 1`` for odd width."""
    if parity == "even":
        r0 = abs(int(v)) + 1
        top = L + 1
        return top if (top - r0) % 2 == 0 else top - 1
    return L + 1


def character_sum_identity(L: int, v, parity: str) -> IdentityWitness:
    """Check enumeration form = closed form = sum of finitized characters, exactly."""
    if parity == "even":
        N = 2 * L
        v = Fraction(v)
        r0, step = abs(int(v)) + 1, 2
        s = 2
    elif parity == "odd":
        N = 2 * L + 1
        v = _half(v)
        r0, step = int(abs(v) + Fraction(1, 2)), 1
        s = 1
    else:
        raise DomainError(f"parity must be 'even' or 'odd', got {parity!r}")
    enum = sector_partition(N, v)
    closed = sector_partition(N, v, closed=True)
    rs = tuple(range(r0, character_sum_upper_limit(L, v, parity) + 1, step))
    total = RationalQSeries.zero()
    for r in rs:
        total = total + finitized_character(r, s, N)
    dim_ok = closed.at_one() == sector_dimension(N, v)
    ok1, ok2 = enum == closed, closed == total
    return IdentityWitness(ok1 and ok2 and dim_ok, L, v, parity, rs, ok1, ok2, dim_ok)


# --- continuum limit ------------------------------------------------------


def partition_numbers(n_max: int) -> list[int]:
    """``p(0..n_max)`` by Euler's pentagonal recurrence."""
    p = [1] + [0] * n_max
    for n in range(1, n_max + 1):
        k, acc = 1, 0
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > n:
                break
            sign = 1 if k % 2 else -1
            acc += sign * p[n - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= n:
                acc += sign * p[n - g2]
            k += 1
        p[n] = acc
    return p


def eta_inverse_truncated(order: int) -> RationalQSeries:
    """``q^(-1/24) prod_{n>=1} (1 - q^n)^(-1)`` through ``q^order`` (relative to the prefactor)."""
    if order < 0:
        raise DomainError(f"negative order {order}")
    # expand the product directly; independent of the pentagonal recurrence
    coeffs = [1] + [0] * order
    for n in range(1, order + 1):
        for k in range(n, order + 1):
            coeffs[k] += coeffs[k - n]
    return RationalQSeries.from_q_poly(coeffs, Fraction(-1, 24), truncation_q=order + 1)


def euler_product_truncated(order: int) -> RationalQSeries:
    """``prod_{n=1}^{order} (1 - q^n)`` truncated after ``q^order``."""
    coeffs = [1] + [0] * order
    for n in range(1, order + 1):
        for k in range(order, n - 1, -1):
            coeffs[k] -= coeffs[k - n]
    return RationalQSeries.from_q_poly(coeffs, 0, truncation_q=order + 1)


@dataclass(frozen=True)
class LimitReport:
    all_match: bool
    compared: int
    first_mismatch: Fraction | None
    """Exponent of q (relative to the leading power) of the first disagreement."""


def continuum_limit_check(v, order: int, L: int, parity: str | None = None) -> LimitReport:
    """Compare the first ``order`` integer-step coefficients of ``Z_v`` with ``q^(v^2/2)/eta``."""
    v = Fraction(v)
    if parity is None:
        parity = "even" if v.denominator == 1 else "odd"
    N = 2 * L if parity == "even" else 2 * L + 1
    Z = sector_partition(N, v, closed=True)
    target = eta_inverse_truncated(order).shift(v * v / 2)
    base = target.offset
    for k in range(order):
        e = Fraction(base + GRAIN * k, GRAIN)
        if Z.coefficient(e) != target.coefficient(e):
            return LimitReport(False, order, Fraction(k))
    return LimitReport(True, order, None)
