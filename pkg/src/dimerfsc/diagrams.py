"""Two-column diagrams: the labels of transfer-matrix eigenstates.

A diagram of height ``L`` is a pair of subsets ``(eps | mu)`` of ``{1..L}``.
Index ``j`` in ``eps`` means the mode ``j`` carries ``epsilon_j = 1``, likewise
for ``mu``.  An index present in both columns counts twice wherever sums over
the diagram appear.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from .errors import BudgetError, DomainError

Parity = Literal["even", "odd"]

#: default cap on the number of diagrams materialised by ``enumerate_diagrams``
ENUMERATION_BUDGET = 4**10


@dataclass(frozen=True, order=True)
class TwoColumnDiagram:
    max_height: int
    eps: tuple[int, ...] = ()
    mu: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.max_height < 0:
            raise DomainError(f"negative diagram height {self.max_height}")
        for name in ("eps", "mu"):
            col = tuple(getattr(self, name))
            if any(b <= a for a, b in zip(col, col[1:])):
                raise DomainError(f"{name} column must be strictly increasing: {col}")
            if col and (col[0] < 1 or col[-1] > self.max_height):
                raise DomainError(f"{name} column {col} outside 1..{self.max_height}")
            object.__setattr__(self, name, col)

    @classmethod
    def of(cls, L: int, eps: Iterable[int] = (), mu: Iterable[int] = ()) -> TwoColumnDiagram:
        return cls(L, tuple(sorted(eps)), tuple(sorted(mu)))

    @classmethod
    def parse(cls, text: str, L: int) -> TwoColumnDiagram:
        """Inverse of ``str``: ``"(1,2|3)"``, with ``-`` for an empty column."""
        body = text.strip()
        if not (body.startswith("(") and body.endswith(")")) or body.count("|") != 1:
            raise DomainError(f"malformed diagram {text!r}")
        left, right = body[1:-1].split("|")

        def column(part: str) -> tuple[int, ...]:
            part = part.strip()
            if part in ("", "-"):
                return ()
            try:
                return tuple(int(x) for x in part.split(","))
            except ValueError as exc:
                raise DomainError(f"malformed diagram {text!r}") from exc

        return cls(L, column(left), column(right))

    def __str__(self) -> str:
        def column(c: tuple[int, ...]) -> str:
            return ",".join(map(str, c)) if c else "-"

        return f"({column(self.eps)}|{column(self.mu)})"

    def entries(self) -> tuple[int, ...]:
        """All indices with multiplicity ``eps_j + mu_j``, ascending."""
        return tuple(sorted(self.eps + self.mu))

    def multiplicities(self) -> list[int]:
        """``eps_j + mu_j`` for ``j = 1..L``."""
        occ = [0] * self.max_height
        for j in self.eps:
            occ[j - 1] += 1
        for j in self.mu:
            occ[j - 1] += 1
        return occ

    def with_height(self, L: int) -> TwoColumnDiagram:
        return TwoColumnDiagram(L, self.eps, self.mu)

    def swapped(self) -> TwoColumnDiagram:
        return TwoColumnDiagram(self.max_height, self.mu, self.eps)


def _subsets(L: int) -> list[tuple[int, ...]]:
    out = [c for k in range(L + 1) for c in itertools.combinations(range(1, L + 1), k)]
    out.sort()
    return out


def iter_diagrams(L: int) -> Iterator[TwoColumnDiagram]:
    """Stream all ``4**L`` diagrams in lexicographic ``(eps, mu)`` order."""
    if L < 0:
        raise DomainError(f"negative height {L}")
    subsets = _subsets(L)
    for eps in subsets:
        for mu in subsets:
            yield TwoColumnDiagram(L, eps, mu)


def enumerate_diagrams(L: int, budget: int = ENUMERATION_BUDGET) -> list[TwoColumnDiagram]:
    if L < 0:
        raise DomainError(f"negative height {L}")
    if 4**L > budget:
        raise BudgetError(f"4**{L} diagrams exceed enumeration budget {budget}; use iter_diagrams")
    return list(iter_diagrams(L))


def variation_index(D: TwoColumnDiagram) -> int:
    return len(D.mu) - len(D.eps)


def excess_parameter(D: TwoColumnDiagram) -> int:
    # same count as variation_index; for odd N the half-integer sector is w -+ 1/2
    return len(D.mu) - len(D.eps)


def enumerate_sector(L: int, v: int) -> list[TwoColumnDiagram]:
    """All height-``L`` diagrams with ``|mu| - |eps| == v`` in lexicographic order."""
    if abs(v) > L:
        return []
    by_size: dict[int, list[tuple[int, ...]]] = {}
    for s in _subsets(L):
        by_size.setdefault(len(s), []).append(s)
    out = []
    for eps in _subsets(L):
        for mu in by_size.get(len(eps) + v, ()):
            out.append(TwoColumnDiagram(L, eps, mu))
    out.sort()
    return out


def as_sector_label(N: int, v) -> Fraction:
    """Validate ``v`` as a sector label for width ``N`` (``v = N/2 mod 1``)."""
    v = Fraction(v)
    if (2 * v).denominator != 1 or (int(2 * v) - N) % 2:
        raise DomainError(f"v={v} incompatible with N={N}: need v = N/2 mod 1")
    return v


def sector_dimension(N: int, v) -> int:
    """``dim E_v = binom(N, N/2 - v)``."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    v = as_sector_label(N, v)
    k = Fraction(N, 2) - v
    if k < 0 or k > N:
        return 0
    return math.comb(N, int(k))


def conformal_exponent(D: TwoColumnDiagram, parity: Parity) -> Fraction:
    """Level of ``D`` in the sector partition function.

    Even width sums ``j - 1/2`` over the entries, odd width sums ``j``.
    """
    entries = D.entries()
    if parity == "even":
        return sum((Fraction(2 * j - 1, 2) for j in entries), Fraction(0))
    if parity == "odd":
        return Fraction(sum(entries))
    raise DomainError(f"parity must be 'even' or 'odd', got {parity!r}")


def parity_of(N: int) -> Parity:
    return "even" if N % 2 == 0 else "odd"
