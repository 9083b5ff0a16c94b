"""Brute-force ground truth for the spectrum and sector structure.

Two independent routes to the cylinder partition function:

* dense ``2**N x 2**N`` transfer matrices assembled from the Pauli-operator
  definition ``T = V3 V1``;
* a row-profile dynamic programme over perfect matchings of the ``N x M``
  grid, periodic in the ``M`` direction.

Arrow basis: site ``i`` (1-based) is bit ``i - 1`` of the state index, an up
arrow (a vertical dimer leaving the site northwards) is a set bit.

Operators come in three scalar modes.  ``"int"`` holds exact Python integers,
``"poly"`` holds polynomials in alpha as a stack of integer coefficient
matrices (index 0 is the constant term), ``"float"`` holds doubles.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import BudgetError, DomainError

Mode = Literal["int", "poly", "float"]

DENSE_BUDGET = 14
MATCHING_BUDGET = 64

_INT64_SAFE = 2**62


def _as_object(a: np.ndarray) -> np.ndarray:
    return a.astype(object) if a.dtype != object else a


def _to_int64(a: np.ndarray) -> np.ndarray | None:
    if a.dtype == np.int64:
        return a
    try:
        return a.astype(np.int64)
    except OverflowError:
        return None


def _exact_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact integer product; uses int64 when no intermediate can overflow."""
    a64, b64 = _to_int64(a), _to_int64(b)
    if a64 is not None and b64 is not None:
        bound = int(np.abs(a64).max(initial=0)) * int(np.abs(b64).max(initial=0)) * max(a.shape[-1], 1)
        if bound < _INT64_SAFE:
            return (a64 @ b64).astype(object)
    return np.dot(_as_object(a), _as_object(b))


@dataclass(frozen=True, eq=False)
class DenseOperator:
    data: np.ndarray
    mode: Mode

    def __post_init__(self) -> None:
        if self.mode == "poly":
            if self.data.ndim != 3 or self.data.shape[1] != self.data.shape[2]:
                raise DomainError("poly operator data must have shape (degree+1, dim, dim)")
        elif self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
            raise DomainError("operator data must be square")

    @property
    def dimension(self) -> int:
        return self.data.shape[-1]

    @property
    def N(self) -> int:
        return self.dimension.bit_length() - 1

    @property
    def degree(self) -> int:
        return self.data.shape[0] - 1 if self.mode == "poly" else 0

    @classmethod
    def identity(cls, N: int, mode: Mode = "int") -> DenseOperator:
        dim = 1 << N
        if mode == "float":
            return cls(np.eye(dim), mode)
        eye = np.eye(dim, dtype=np.int64).astype(object)
        return cls(eye[None] if mode == "poly" else eye, mode)

    def _check(self, other: DenseOperator) -> None:
        if other.mode != self.mode or other.dimension != self.dimension:
            raise DomainError(f"incompatible operators: {self.mode}/{self.dimension} vs {other.mode}/{other.dimension}")

    def _trimmed(self) -> DenseOperator:
        if self.mode != "poly":
            return self
        d = self.data
        top = d.shape[0]
        while top > 1 and not any(d[top - 1].flat):
            top -= 1
        return DenseOperator(d[:top], "poly")

    def __add__(self, other: DenseOperator) -> DenseOperator:
        self._check(other)
        if self.mode != "poly":
            return DenseOperator(self.data + other.data, self.mode)
        deg = max(self.data.shape[0], other.data.shape[0])
        out = np.zeros((deg, self.dimension, self.dimension), dtype=object)
        out[: self.data.shape[0]] += self.data
        out[: other.data.shape[0]] += other.data
        return DenseOperator(out, "poly")._trimmed()

    def __neg__(self) -> DenseOperator:
        return DenseOperator(-self.data, self.mode)

    def __sub__(self, other: DenseOperator) -> DenseOperator:
        return self + (-other)

    def __matmul__(self, other: DenseOperator) -> DenseOperator:
        self._check(other)
        if self.mode == "float":
            return DenseOperator(self.data @ other.data, "float")
        if self.mode == "int":
            return DenseOperator(_exact_matmul(self.data, other.data), "int")
        da, db = self.data.shape[0], other.data.shape[0]
        out = np.zeros((da + db - 1, self.dimension, self.dimension), dtype=object)
        for i in range(da):
            if not any(self.data[i].flat):
                continue
            for j in range(db):
                out[i + j] += _exact_matmul(self.data[i], other.data[j])
        return DenseOperator(out, "poly")._trimmed()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DenseOperator) or other.mode != self.mode:
            return NotImplemented
        a, b = self._trimmed().data, other._trimmed().data
        return a.shape == b.shape and bool(np.all(a == b))

    __hash__ = None  # type: ignore[assignment]

    def is_zero(self) -> bool:
        return not np.any(self.data != 0)

    def trace(self):
        """Scalar trace; a coefficient list (constant term first) in poly mode."""
        if self.mode == "poly":
            return _trim_poly([sum(int(x) for x in np.diagonal(c)) for c in self.data])
        if self.mode == "int":
            return sum(int(x) for x in np.diagonal(self.data))
        return float(np.trace(self.data))

    def evaluate(self, alpha) -> DenseOperator:
        """Substitute a numeric alpha into a poly operator (int mode for integers)."""
        if self.mode != "poly":
            raise DomainError("evaluate() needs a poly operator")
        if isinstance(alpha, float):
            powers = [alpha**k for k in range(self.data.shape[0])]
            return DenseOperator(sum(p * c.astype(float) for p, c in zip(powers, self.data)), "float")
        alpha = Fraction(alpha)
        if alpha.denominator != 1:
            raise DomainError("int-mode evaluation needs an integer alpha")
        a = int(alpha)
        out = np.zeros((self.dimension, self.dimension), dtype=object)
        for k, c in enumerate(self.data):
            out = out + c * (a**k)
        return DenseOperator(out, "int")

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        return self.data[..., list(rows), :][..., list(cols)]


def _trim_poly(coeffs: list[int]) -> list[int]:
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _check_budget(N: int, budget: int = DENSE_BUDGET) -> None:
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if N > budget:
        raise BudgetError(f"N={N} exceeds dense operator budget N <= {budget}")


def _infer_mode(alpha) -> Mode:
    if alpha is None:
        return "poly"
    if isinstance(alpha, float):
        return "float"
    return "int"


def _from_entries(N: int, entries: dict[tuple[int, int], int], mode: Mode, alpha=None) -> DenseOperator:
    """Operator from ``{(row, col): power of alpha}`` with unit coefficients."""
    dim = 1 << N
    if mode == "poly":
        deg = max((p for p in entries.values()), default=0)
        data = np.zeros((deg + 1, dim, dim), dtype=object)
        for (r, c), p in entries.items():
            data[p, r, c] += 1
        return DenseOperator(data, "poly")
    if mode == "float":
        data = np.zeros((dim, dim))
        for (r, c), p in entries.items():
            data[r, c] += float(alpha) ** p
        return DenseOperator(data, "float")
    a = 1 if alpha is None else Fraction(alpha)
    if Fraction(a).denominator != 1:
        raise DomainError(f"int mode needs an integer alpha, got {alpha}")
    data = np.zeros((dim, dim), dtype=object)
    for (r, c), p in entries.items():
        data[r, c] += int(a) ** p
    return DenseOperator(data, "int")


def build_V1(N: int, mode: Mode = "int") -> DenseOperator:
    """Global arrow flip ``prod_i sigma^x_i``: state ``s`` goes to its complement."""
    _check_budget(N)
    full = (1 << N) - 1
    return _from_entries(N, {(s ^ full, s): 0 for s in range(1 << N)}, mode, alpha=1)


def _v3_factor(N: int, i: int, mode: Mode, alpha) -> DenseOperator:
    """``1 + alpha sigma^-_i sigma^-_{i+1}``: an up-up pair at sites i, i+1 becomes down-down."""
    pair = 0b11 << (i - 1)
    entries = {(s, s): 0 for s in range(1 << N)}
    for s in range(1 << N):
        if s & pair == pair:
            entries[(s ^ pair, s)] = 1
    return _from_entries(N, entries, mode, alpha)


def build_V3(N: int, alpha=None, mode: Mode | None = None, order: str = "ascending") -> DenseOperator:
    """Horizontal-dimer creator ``prod_{i=1}^{N-1} (1 + alpha sigma^-_i sigma^-_{i+1})``.

    ``alpha=None`` gives the poly-mode operator.  ``order`` fixes the factor
    order in the written product (``"ascending"``: ``i = 1`` leftmost).
    """
    _check_budget(N)
    mode = mode or _infer_mode(alpha)
    if order not in ("ascending", "descending"):
        raise DomainError(f"order must be 'ascending' or 'descending', got {order!r}")
    sites = range(1, N) if order == "ascending" else range(N - 1, 0, -1)
    op = DenseOperator.identity(N, mode)
    for i in sites:
        op = op @ _v3_factor(N, i, mode, alpha)
    return op


def transfer_matrix(N: int, alpha=None, mode: Mode | None = None) -> DenseOperator:
    mode = mode or _infer_mode(alpha)
    return build_V3(N, alpha, mode) @ build_V1(N, mode)


def variation_eigenvalues(N: int) -> list[Fraction]:
    """Diagonal of ``(1/2) sum_i (-1)^i sigma^z_i`` in state-index order."""
    out = []
    for s in range(1 << N):
        twice = sum((-1) ** i * (1 if s >> (i - 1) & 1 else -1) for i in range(1, N + 1))
        out.append(Fraction(twice, 2))
    return out


def variation_operator(N: int, mode: Mode = "int") -> DenseOperator:
    """The variation index operator, scaled by 2 in exact modes to stay integral.

    In ``"float"`` mode the true half-integer eigenvalues are stored.  Exact
    modes store ``2 V`` so all commutation identities remain integer-valued.
    """
    _check_budget(N)
    vals = variation_eigenvalues(N)
    dim = 1 << N
    if mode == "float":
        return DenseOperator(np.diag([float(v) for v in vals]), "float")
    data = np.zeros((dim, dim), dtype=object)
    for s, v in enumerate(vals):
        data[s, s] = int(2 * v)
    return DenseOperator(data[None] if mode == "poly" else data, mode)


def sector_states(N: int) -> dict[Fraction, list[int]]:
    """Arrow states grouped by variation-index eigenvalue."""
    groups: dict[Fraction, list[int]] = {}
    for s, v in enumerate(variation_eigenvalues(N)):
        groups.setdefault(v, []).append(s)
    return dict(sorted(groups.items()))


def commutator(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    return a @ b - b @ a


def anticommutator(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    return a @ b + b @ a


def trace_power(op: DenseOperator, M: int):
    """``Tr op**M`` by repeated multiplication."""
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    acc = op
    for _ in range(M - 1):
        acc = acc @ op
    return acc.trace()


# --- matching enumeration -------------------------------------------------


@dataclass(frozen=True)
class CylinderInstance:
    """``N`` sites per row (open), ``M`` rows around the periodic direction.

    ``alpha=None`` requests the exact polynomial.
    """

    N: int
    M: int
    alpha: object = None

    def __post_init__(self) -> None:
        if self.N < 1 or self.M < 2:
            raise DomainError(f"need N >= 1 and M >= 2, got N={self.N}, M={self.M}")


def _row_fillings(N: int) -> dict[int, list[tuple[int, int]]]:
    """For each incoming mask, the admissible ``(outgoing mask, #horizontal)`` pairs.

    Sites covered from below are closed.  Every other site either starts a
    vertical dimer (outgoing bit) or is paired horizontally with a free
    neighbour; the free sites left over must split into runs of even length.
    """
    table: dict[int, list[tuple[int, int]]] = {}
    for incoming in range(1 << N):
        options = []
        for outgoing in range(1 << N):
            if incoming & outgoing:
                continue
            free = ~(incoming | outgoing) & ((1 << N) - 1)
            run, ok = 0, True
            for i in range(N + 1):
                if i < N and free >> i & 1:
                    run += 1
                else:
                    if run % 2:
                        ok = False
                        break
                    run = 0
            if ok:
                options.append((outgoing, bin(free).count("1") // 2))
        table[incoming] = options
    return table


def _poly_add_shift(acc: dict[int, list[int]], key: int, poly: list[int], shift: int) -> None:
    cur = acc.setdefault(key, [])
    need = len(poly) + shift
    if len(cur) < need:
        cur.extend([0] * (need - len(cur)))
    for k, c in enumerate(poly):
        cur[k + shift] += c


def brute_force_Z(inst: CylinderInstance):
    """Weighted count ``sum alpha**h`` of dimer coverings of the ``N x M`` cylinder.

    Returns the coefficient list (constant term first) when ``inst.alpha`` is
    None, otherwise the polynomial evaluated at ``inst.alpha``.  The seam is
    handled by fixing the profile of vertical dimers crossing it, propagating
    ``M`` rows and keeping only runs that close on the same profile.
    """
    N, M = inst.N, inst.M
    if N * M > MATCHING_BUDGET:
        raise BudgetError(f"N*M={N * M} exceeds matching budget {MATCHING_BUDGET}")
    fills = _row_fillings(N)
    total: list[int] = [0]
    for seam in range(1 << N):
        layer: dict[int, list[int]] = {seam: [1]}
        for _ in range(M):
            nxt: dict[int, list[int]] = {}
            for incoming, poly in layer.items():
                for outgoing, h in fills[incoming]:
                    _poly_add_shift(nxt, outgoing, poly, h)
            layer = nxt
        closing = layer.get(seam)
        if closing:
            if len(total) < len(closing):
                total.extend([0] * (len(closing) - len(total)))
            for k, c in enumerate(closing):
                total[k] += c
    total = _trim_poly(total)
    if inst.alpha is None:
        return total
    return evaluate_poly(total, inst.alpha)


def evaluate_poly(coeffs: Sequence[int], alpha):
    """Horner evaluation; exact for int/Fraction alpha."""
    acc = 0 * alpha
    for c in reversed(coeffs):
        acc = acc * alpha + c
    return acc
