from fractions import Fraction

import numpy as np
import pytest

from dimerfsc import oracle
from dimerfsc.diagrams import sector_dimension
from dimerfsc.errors import BudgetError, DomainError
from dimerfsc.oracle import CylinderInstance, DenseOperator, brute_force_Z, trace_power


def test_V1_small():
    assert np.array_equal(oracle.build_V1(1).data, np.array([[0, 1], [1, 0]], dtype=object))
    v2 = oracle.build_V1(2).data
    assert np.array_equal(v2, np.fliplr(np.eye(4, dtype=int)).astype(object))
    for N in range(1, 7):
        V1 = oracle.build_V1(N)
        assert V1 @ V1 == DenseOperator.identity(N)
        assert all(sum(row) == 1 for row in V1.data)


def test_V3_two_sites():
    V3 = oracle.build_V3(2)
    assert V3.degree == 1
    expected = np.zeros((4, 4), dtype=object)
    expected[0b00, 0b11] = 1  # |up up> -> alpha |down down>
    assert np.array_equal(V3.data[1], expected)
    assert np.array_equal(V3.data[0], np.eye(4, dtype=int).astype(object))


@pytest.mark.parametrize("N", range(1, 7))
def test_V3_minus_one_is_nilpotent(N):
    # V3 - 1 lowers the number of up arrows by 2, so its (N//2 + 1)-th power vanishes
    X = oracle.build_V3(N) - DenseOperator.identity(N, "poly")
    P = X
    for _ in range(N // 2):
        P = P @ X
    assert P.is_zero()
    assert oracle.build_V3(N, 0) == DenseOperator.identity(N, "int")
    assert all(int(c) >= 0 for c in oracle.build_V3(N).data.flat)


@pytest.mark.parametrize("N", range(1, 9))
def test_V3_factor_order_irrelevant(N):
    assert oracle.build_V3(N, order="ascending") == oracle.build_V3(N, order="descending")


def test_transfer_matrix_examples():
    assert oracle.transfer_matrix(1) == oracle.build_V1(1, "poly")
    for N in (1, 3, 5):
        assert trace_power(oracle.transfer_matrix(N, 1), 1) == 0
    assert oracle.transfer_matrix(4, 0) == oracle.build_V1(4)


def test_variation_operator():
    # up arrow at site 1 carries (-1)^1 sigma^z / 2 = -1/2; up is bit 1
    assert oracle.variation_eigenvalues(1) == [Fraction(1, 2), Fraction(-1, 2)]
    V = oracle.variation_operator(2, "float")
    vals = sorted(np.diag(V.data))
    assert vals == [-1.0, 0.0, 0.0, 1.0]
    for N in range(1, 9):
        assert sum(oracle.variation_eigenvalues(N)) == 0


@pytest.mark.parametrize("N", range(1, 11))
def test_variation_dimensions(N):
    for v, states in oracle.sector_states(N).items():
        assert len(states) == sector_dimension(N, v)


def test_trace_power_examples():
    assert trace_power(DenseOperator.identity(2), 5) == 4
    T = oracle.transfer_matrix(2, 1)
    assert trace_power(T, 2) == brute_force_Z(CylinderInstance(2, 2, 1))
    for N in range(1, 6):
        T0 = oracle.transfer_matrix(N, 0)
        for M in range(1, 6):
            assert trace_power(T0, M) == (2**N if M % 2 == 0 else 0)
    with pytest.raises(DomainError):
        trace_power(T, 0)


def test_brute_force_examples():
    z22 = brute_force_Z(CylinderInstance(2, 2))
    assert all(c >= 0 for c in z22)
    # the one-site-wide cylinder of circumference 2 has two distinct vertical bonds
    assert brute_force_Z(CylinderInstance(1, 2)) == [2]
    for N in (1, 3, 5):
        for M in (3, 5):
            assert brute_force_Z(CylinderInstance(N, M)) == [0]
    assert brute_force_Z(CylinderInstance(2, 3, 2)) == 3 * 2 + 8
    with pytest.raises(BudgetError):
        brute_force_Z(CylinderInstance(9, 8))


def _matchings_by_hand(N, M):
    """Direct recursive perfect-matching count on the N x M cylinder multigraph."""
    edges = []
    for r in range(M):
        for i in range(N - 1):
            edges.append(((r, i), (r, i + 1), 1))
        for i in range(N):
            edges.append(((r, i), ((r + 1) % M, i), 0))
    sites = [(r, i) for r in range(M) for i in range(N)]

    def rec(covered):
        free = [s for s in sites if s not in covered]
        if not free:
            return {0: 1}
        s = free[0]
        out = {}
        for a, b, h in edges:
            if s in (a, b):
                t = b if a == s else a
                if t != s and t not in covered:
                    for k, c in rec(covered | {s, t}).items():
                        out[k + h] = out.get(k + h, 0) + c
        return out

    poly = rec(frozenset())
    return [poly.get(k, 0) for k in range(max(poly) + 1)] if poly else [0]


@pytest.mark.parametrize("N,M", [(1, 2), (2, 2), (2, 3), (3, 2), (2, 4), (3, 4), (4, 3)])
def test_row_dp_matches_recursive_matching(N, M):
    assert brute_force_Z(CylinderInstance(N, M)) == oracle._trim_poly(_matchings_by_hand(N, M))


def test_budget():
    with pytest.raises(BudgetError):
        oracle.build_V1(15)
    with pytest.raises(DomainError):
        CylinderInstance(2, 1)


def test_modes_agree():
    N = 4
    Tp = oracle.transfer_matrix(N)
    assert Tp.evaluate(3) == oracle.transfer_matrix(N, 3)
    assert np.allclose(Tp.evaluate(0.5).data, oracle.transfer_matrix(N, 0.5).data)
    with pytest.raises(DomainError):
        Tp.evaluate(Fraction(1, 2))


def test_exact_matmul_large_entries():
    big = np.array([[2**70, 1], [0, 1]], dtype=object)
    A = DenseOperator(big, "int")
    assert (A @ A).data[0, 0] == 2**140
