from fractions import Fraction
from itertools import permutations, product

import pytest

from reidemeister.exactlin import (
    DimensionError,
    IntMatrix,
    MatrixParseError,
    char_poly,
    coset_representatives,
    det,
    eigenlattice,
    eigenvalue_profile,
    finite_order,
    in_centralizer_span,
    kernel_lattice,
    lattice_membership,
    matrix_power_sum,
    parse_matrix,
    smith_normal_form,
)
from conftest import random_matrix, random_unimodular

I2 = IntMatrix.identity(2)
I3 = IntMatrix.identity(3)
FIB = parse_matrix("2,3;3,5")
ROT4 = parse_matrix("0,-1;1,0")


def brute_det(m: IntMatrix) -> int:
    # independent oracle: Leibniz expansion over permutations
    n = m.rows
    total = 0
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = sign
        for i in range(n):
            term *= m[i, perm[i]]
        total += term
    return total


def test_det_examples():
    assert det(I2) == 1
    assert det(FIB) == 1  # 2*5 - 3*3 computed by hand
    assert det(ROT4) == 1


def test_det_matches_permutation_expansion(rng):
    for n in (2, 3, 4):
        for _ in range(50):
            m = random_matrix(rng, n, 9)
            assert m.det() == brute_det(m)


def test_det_rejects_non_square():
    with pytest.raises(DimensionError):
        IntMatrix.from_rows([[1, 2, 3], [4, 5, 6]]).det()


def test_matrix_algebra_basics():
    assert (FIB * FIB.inverse_unimodular()) == I2
    assert FIB ** 0 == I2
    assert FIB ** -1 == FIB.inverse_unimodular()
    assert (FIB + (-FIB)) == IntMatrix.zero(2, 2)
    assert FIB.transpose().transpose() == FIB
    assert FIB.apply((1, 0)) == (2, 3)


def test_power_sum_identity(rng):
    for _ in range(25):
        a = random_unimodular(rng, 2, 3)
        for k in (-7, -2, -1, 0, 1, 2, 5, 12):
            s = matrix_power_sum(a, k)
            assert (a - I2) * s == a ** k - I2


def test_snf_examples():
    two_i = I2 + I2
    assert smith_normal_form(two_i).elementary_divisors == (2, 2)
    assert smith_normal_form(IntMatrix.zero(2, 2)).elementary_divisors == (0, 0)
    # I - [[0,1],[1,1]] reduced by hand gives unit divisors
    m = parse_matrix("1,-1;-1,0")
    assert smith_normal_form(m).elementary_divisors == (1, 1)


def test_snf_invariants(rng):
    for n in (2, 3):
        for _ in range(60):
            m = random_matrix(rng, n, 9)
            snf = smith_normal_form(m)
            assert snf.U * m * snf.V == snf.D
            assert snf.U.det() in (1, -1)
            assert snf.V.det() in (1, -1)
            divs = snf.elementary_divisors
            assert all(d >= 0 for d in divs)
            nonzero = [d for d in divs if d]
            assert list(divs[: len(nonzero)]) == nonzero  # zeros last
            for a, b in zip(nonzero, nonzero[1:]):
                assert b % a == 0
            d = m.det()
            if d:
                prod = 1
                for v in nonzero:
                    prod *= v
                assert len(nonzero) == n and prod == abs(d)


def test_snf_rect_shapes(rng):
    for rows, cols in ((2, 4), (3, 2), (1, 3)):
        for _ in range(20):
            m = IntMatrix(rows, cols, tuple(rng.randint(-5, 5) for _ in range(rows * cols)))
            snf = smith_normal_form(m)
            assert snf.U * m * snf.V == snf.D


def test_snf_deterministic():
    m = parse_matrix("6,4;8,10")
    first = smith_normal_form(m)
    second = smith_normal_form(m)
    assert first == second


def test_eigenvalue_profile_examples():
    unipotent = parse_matrix("1,1;0,1")
    p = eigenvalue_profile(unipotent)
    assert p.kind == "repeated-one" and p.finite_order is None

    p = eigenvalue_profile(ROT4)
    assert p.kind == "complex-pair" and p.finite_order == 4

    p = eigenvalue_profile(FIB)
    assert p.kind == "real-irrational-pair"
    assert p.trace == 7 and p.det == 1  # discriminant 45 > 0


def test_eigenvalue_profile_dim3_components():
    a = parse_matrix("1,0,1;0,-1,0;0,0,-1")
    p = eigenvalue_profile(a)
    assert p.kind == "mixed-3"
    assert p.components == ("+1", "-1", "-1")
    assert p.multiplicity_of_one() == 1 and p.multiplicity_of_minus_one() == 2

    b = parse_matrix("1,0,0;0,0,-1;0,1,-1")
    p = eigenvalue_profile(b)
    assert p.components == ("+1", "complex-pair")
    assert p.residual == (1, 1)  # x^2 + x + 1, the order-3 block

    c = parse_matrix("1,0,0;0,5,2;0,2,1")
    p = eigenvalue_profile(c)
    assert p.components == ("+1", "real-pair")


def test_eigenvalue_profile_conjugation_invariant(rng):
    for n in (2, 3):
        for _ in range(30):
            m = random_unimodular(rng, n, 3)
            p = random_unimodular(rng, n, 2)
            conj = p * m * p.inverse_unimodular()
            assert eigenvalue_profile(conj) == eigenvalue_profile(m)


def test_eigenvalue_profile_rejects_bad_input():
    with pytest.raises(ValueError):
        eigenvalue_profile(parse_matrix("2,0;0,2"))
    with pytest.raises(DimensionError):
        eigenvalue_profile(IntMatrix.identity(4))


def test_eigenlattice_examples():
    full = eigenlattice(-I2, -1)
    assert full.rank == 2
    r = eigenlattice(parse_matrix("1,2;0,-1"), 1)
    assert r.basis == ((1, 0),)
    assert eigenlattice(FIB, 1).basis == ()


def test_eigenlattice_saturated_and_exact(rng):
    for _ in range(40):
        a = random_unimodular(rng, 2, 3)
        for eps in (1, -1):
            lat = eigenlattice(a, eps)
            for v in lat.basis:
                assert a.apply(v) == tuple(eps * x for x in v)
            if lat.basis:
                basis_matrix = IntMatrix.from_columns(lat.basis)
                divs = smith_normal_form(basis_matrix).elementary_divisors
                assert all(d == 1 for d in divs)


def test_finite_order_examples():
    assert finite_order(I2) == 1
    assert finite_order(parse_matrix("0,-1;1,-1")) == 3  # order-3 block
    assert finite_order(parse_matrix("1,1;0,1")) is None
    assert finite_order(-I3) == 2
    with pytest.raises(DimensionError):
        finite_order(IntMatrix.identity(4))


def test_finite_order_power_property(rng):
    for _ in range(60):
        m = random_unimodular(rng, 2, 2)
        d = finite_order(m)
        if d is not None:
            assert m ** d == I2
            for e in range(1, d):
                assert m ** e != I2


def test_in_centralizer_span():
    m4 = ROT4
    assert in_centralizer_span(m4, -(m4 ** 3))
    m3 = parse_matrix("0,-1;1,-1")
    assert not in_centralizer_span(m3, parse_matrix("1,1;0,1"))
    assert in_centralizer_span(m3, I2)
    with pytest.raises(ValueError):
        in_centralizer_span(I2, m3)
    with pytest.raises(ValueError):
        in_centralizer_span(parse_matrix("1,1;0,1"), m3)


def test_lattice_membership_zero_target():
    gens = FIB
    assert lattice_membership((0, 0), gens) == (0, 0)


def test_lattice_membership_spans_everything_for_fib():
    # columns of [2A | I-A] for the trace-7 symmetric matrix span Z^2
    a = FIB
    gens = (a + a).hstack(I2 - a)
    for target in product(range(-3, 4), repeat=2):
        coeffs = lattice_membership(target, gens)
        assert coeffs is not None
        assert gens.apply(coeffs) == tuple(target)


def test_lattice_membership_absent_case():
    # columns of [2A | I-A] all have even coordinates here, so (1,0) is out
    a = parse_matrix("5,2;2,1")
    gens = (a + a).hstack(I2 - a)
    assert lattice_membership((1, 0), gens) is None


def test_lattice_membership_roundtrip(rng):
    for _ in range(50):
        rows, cols = rng.choice(((2, 3), (3, 3), (3, 5), (2, 2)))
        gens = IntMatrix(rows, cols, tuple(rng.randint(-4, 4) for _ in range(rows * cols)))
        coeffs = tuple(rng.randint(-3, 3) for _ in range(cols))
        target = gens.apply(coeffs)
        found = lattice_membership(target, gens)
        assert found is not None
        assert gens.apply(found) == target


def test_lattice_membership_dim_mismatch():
    with pytest.raises(DimensionError):
        lattice_membership((1, 0, 0), FIB)


def test_kernel_lattice(rng):
    for _ in range(30):
        m = random_matrix(rng, 3, 3)
        lat = kernel_lattice(m)
        for v in lat.basis:
            assert m.apply(v) == (0, 0, 0)


def test_coset_representatives():
    reps = coset_representatives(I2 + I2)  # index 4
    assert reps is not None and len(reps) == 4
    assert len({tuple(r % 2 for r in rep) for rep in reps}) == 4
    assert coset_representatives(IntMatrix.zero(2, 2)) is None


def test_char_poly():
    assert char_poly(FIB) == (1, -7, 1)
    # (x - 1)(x + 1)^2 = x^3 + x^2 - x - 1, ascending coefficients
    assert char_poly(parse_matrix("1,0,1;0,-1,0;0,0,-1")) == (-1, -1, 1, 1)


def test_rat_inverse():
    inv = (I2 - parse_matrix("5,2;2,1")).rat_inverse()
    assert inv.entries == (Fraction(0), Fraction(-1, 2), Fraction(-1, 2), Fraction(1))
    assert not inv.is_integral


def test_parse_matrix_text_and_json():
    assert parse_matrix("2,3;3,5") == FIB
    assert parse_matrix("[[2,3],[3,5]]") == FIB
    assert parse_matrix(" 2 , 3 ; 3 , 5 ") == FIB
    # unicode minus sign is tolerated
    assert parse_matrix("−1,0;0,−1") == -I2


def test_parse_matrix_errors_name_position():
    with pytest.raises(MatrixParseError) as exc:
        parse_matrix("2,x;3,5")
    assert "row 1, entry 2" in str(exc.value)
    assert exc.value.token == "x"
    with pytest.raises(MatrixParseError) as exc:
        parse_matrix("1,2;3")
    assert "row 2" in str(exc.value)
    with pytest.raises(MatrixParseError):
        parse_matrix("[[1,2],[3]]")
    with pytest.raises(MatrixParseError):
        parse_matrix("")
