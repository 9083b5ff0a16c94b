"""Exit criteria; each test carries its criterion number and runs at the stated tolerance."""

import itertools
import time
from fractions import Fraction

import mpmath
import pytest
import sympy as sp

from dimerfsc import fsc, oracle, qseries
from dimerfsc.diagrams import TwoColumnDiagram, iter_diagrams, sector_dimension
from dimerfsc.spectrum import LatticeParams, eigenvalue

D = TwoColumnDiagram.of
x = sp.symbols("x")


def _frac(r) -> Fraction:
    r = sp.Rational(r)
    return Fraction(int(r.p), int(r.q))


@pytest.mark.criterion(1, "Tr T^M equals brute-force cylinder Z (exact polynomials and integers)")
def test_oracle_equivalence():
    start = time.perf_counter()
    for N, M in itertools.product(range(1, 6), (2, 4)):
        T = oracle.transfer_matrix(N)
        z = oracle.brute_force_Z(oracle.CylinderInstance(N, M))
        assert oracle.trace_power(T, M) == z, (N, M)
        for alpha in (1, 2, 3):
            tr = oracle.trace_power(oracle.transfer_matrix(N, alpha, "int"), M)
            assert tr == oracle.brute_force_Z(oracle.CylinderInstance(N, M, alpha)) == oracle.evaluate_poly(z, alpha)
            assert isinstance(tr, int)
    assert time.perf_counter() - start < 60


@pytest.mark.criterion(2, "trace sum rules: sum lambda^k = Tr T^2k (even N<=10), 2 sum lambda^k (odd N<=9), rel 1e-9")
@pytest.mark.parametrize("alpha", [Fraction(1, 2), Fraction(1), Fraction(2)])
def test_spectrum_vs_oracle(alpha):
    start = time.perf_counter()
    for N in range(1, 11):
        params = LatticeParams(N, alpha)
        lams = [float(eigenvalue(params, d)) for d in iter_diagrams(N // 2)]
        T = oracle.transfer_matrix(N, float(alpha))
        T2 = T @ T
        power = T2
        mult = 1 if N % 2 == 0 else 2
        for k in (1, 2, 3):
            if k > 1:
                power = power @ T2
            exact = power.trace()
            predicted = mult * sum(lam**k for lam in lams)
            assert abs(predicted - exact) <= 1e-9 * abs(exact), (N, k)
    assert time.perf_counter() - start < 60


@pytest.mark.criterion(3, "{V,T}=0, [V,V3]=0, {V,V1}=0 exactly in polynomial mode, N<=8")
@pytest.mark.parametrize("N", range(1, 9))
def test_algebraic_structure(N):
    V = oracle.variation_operator(N, "poly")
    T = oracle.transfer_matrix(N)
    assert T.mode == "poly"
    assert oracle.anticommutator(V, T).is_zero()
    assert oracle.commutator(V, oracle.build_V3(N)).is_zero()
    assert oracle.anticommutator(V, oracle.build_V1(N, "poly")).is_zero()


@pytest.mark.criterion(4, "P_0..P_2 as printed; C_{l,n} = sin-power Taylor coefficients l<=8; f_bou series k<=10")
def test_printed_tables():
    assert fsc.p_polynomial(0) == (0, 1)
    assert fsc.p_polynomial(1) == (0, -1, 0, -1)
    assert fsc.p_polynomial(2) == (0, 1, 0, 10, 0, 9)
    for n in range(0, 9):
        ser = sp.series(sp.sin(x) ** (2 * n + 1), x, 0, 18).removeO()
        for l in range(n, 9):
            taylor = _frac(ser.coeff(x, 2 * l + 1) * sp.factorial(2 * l + 1))
            assert fsc.sine_power_coefficient(l, n) == taylor, (l, n)
    half_asinh = sp.series(sp.asinh(x) / 2, x, 0, 23).removeO()
    for k, c in enumerate(fsc.boundary_series_coefficients(10)):
        assert c == _frac(half_asinh.coeff(x, 2 * k + 1))


EVEN_GRID = [50, 76, 116, 174, 264, 400]
ODD_GRID = [51, 77, 115, 175, 265, 399]


@pytest.mark.criterion(5, "log-log slope of |E - E_fsc(l_max)| within 0.15 of -(2 l_max + 3), l_max<=3, 60 digits")
@pytest.mark.parametrize("grid", [EVEN_GRID, ODD_GRID], ids=["even", "odd"])
@pytest.mark.parametrize("diagram", [D(1), D(1, [1]), D(1, [1], [1])], ids=str)
@pytest.mark.parametrize("alpha", [Fraction(1, 2), Fraction(1)], ids=str)
def test_central_claim(grid, diagram, alpha):
    start = time.perf_counter()
    for l_max in range(4):
        fit = fsc.residual_order_fit(grid, diagram, alpha, l_max, digits=60)
        assert abs(fit.slope - fit.expected_slope) <= 0.15, (l_max, fit.slope)
    assert time.perf_counter() - start < 300


@pytest.mark.criterion(6, "extracted N^-(2l+1) amplitude ratios equal exact I_{2l+1} ratios within 1e-10, l<=2")
@pytest.mark.parametrize("parity", ["even", "odd"])
def test_amplitude_ratio_universality(parity):
    sizes = list(range(200, 424, 16)) if parity == "even" else list(range(201, 425, 16))
    pairs = [(D(1, [1]), D(1, [1], [1])), (D(1), D(2, [2]))]
    for d1, d2 in pairs:
        for alpha in (Fraction(1, 2), Fraction(1)):
            c1 = fsc.expansion_coefficients(d1, alpha, sizes, digits=100)
            c2 = fsc.expansion_coefficients(d2, alpha, sizes, digits=100)
            for l in range(3):
                exact = fsc.iom_eigenvalue(d1, l, parity) / fsc.iom_eigenvalue(d2, l, parity)
                with mpmath.workdps(100):
                    err = abs(c1[l] / c2[l] - mpmath.mpf(exact.numerator) / exact.denominator)
                assert err < 1e-10, (str(d1), str(d2), float(alpha), l, float(err))


@pytest.mark.criterion(7, "f_bulk quadrature equals its power series at alpha=1/2 to 1e-20")
def test_bulk_free_energy_series():
    with mpmath.workdps(60):
        gap = abs(fsc.bulk_free_energy(Fraction(1, 2), 60) - fsc.bulk_free_energy_series(Fraction(1, 2), 60))
    assert gap < mpmath.mpf(10) ** -20


@pytest.mark.criterion(8, "enumeration = q-binomial closed form = character sum, |v|<=L<=8, both parities")
def test_character_identities():
    start = time.perf_counter()
    for L in range(0, 9):
        if L:
            for v in range(-L, L + 1):
                w = qseries.character_sum_identity(L, v, "even")
                assert w.enumeration_equals_closed and w.closed_equals_characters and w.dimension_matches, (L, v)
        for k in range(-L - 1, L + 1):
            v = Fraction(2 * k + 1, 2)
            w = qseries.character_sum_identity(L, v, "odd")
            assert w.enumeration_equals_closed and w.closed_equals_characters and w.dimension_matches, (L, v)
    assert time.perf_counter() - start < 60


@pytest.mark.criterion(9, "first 10 coefficients of Z_v match q^(v^2/2)/eta at L=12, v in {0, +-1, +-1/2}")
@pytest.mark.parametrize("v", [Fraction(0), Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(-1, 2)], ids=str)
def test_continuum_limit(v):
    rep = qseries.continuum_limit_check(v, 10, 12)
    assert rep.all_match, rep


@pytest.mark.criterion(10, "sum_v dim E_v t^v = (sqrt t + 1/sqrt t)^N as Laurent polynomials, N<=12")
@pytest.mark.parametrize("N", range(1, 13))
def test_dimension_generating_function(N):
    # Laurent polynomial in s = sqrt(t): exponent of s is 2v
    expanded = {0: 1}
    for _ in range(N):
        nxt = {}
        for e, c in expanded.items():
            nxt[e + 1] = nxt.get(e + 1, 0) + c
            nxt[e - 1] = nxt.get(e - 1, 0) + c
        expanded = nxt
    from_dims = {}
    for k in range(N + 1):
        v = Fraction(N - 2 * k, 2)
        from_dims[int(2 * v)] = sector_dimension(N, v)
    assert from_dims == expanded
