"""Exact integer and rational linear algebra on small dense matrices.

All arithmetic is done with arbitrary-precision Python integers (or
``fractions.Fraction`` for the rational helpers); no floating point is
used anywhere.  Matrix entries routinely exceed 64 bits during witness
searches, so there is deliberately no fixed-width fast path.

The module provides:

* ``IntMatrix`` / ``RatMatrix``, immutable dense matrices;
* exact determinants and unimodular inverses;
* Smith normal form with recorded unimodular transforms (deterministic
  pivoting, so U, D, V are reproducible);
* symbolic eigenvalue profiles for 2x2 and 3x3 unimodular matrices
  (integer roots are extracted exactly, irrational eigenvalues are never
  materialised);
* saturated eigenlattices, finite-order detection, centralizer-span
  membership and integer lattice membership.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import json
from typing import Sequence


class DimensionError(ValueError):
    """Operand shapes do not match the operation."""


class MatrixParseError(ValueError):
    """Malformed matrix text; carries the offending token and position."""

    def __init__(self, message, token=None, position=None):
        super().__init__(message)
        self.token = token
        self.position = position


# ---------------------------------------------------------------------------
# IntMatrix


@dataclass(frozen=True)
class IntMatrix:
    """Dense row-major matrix of arbitrary-precision integers."""

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise DimensionError("matrix dimensions must be positive")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError(
                "expected %d entries, got %d" % (self.rows * self.cols, len(self.entries))
            )
        if not all(isinstance(e, int) for e in self.entries):
            raise TypeError("matrix entries must be integers")

    # -- construction -------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        r = len(rows)
        if r == 0:
            raise DimensionError("matrix needs at least one row")
        c = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != c:
                raise DimensionError("row %d has %d entries, expected %d" % (i + 1, len(row), c))
        return cls(r, c, tuple(int(e) for row in rows for e in row))

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence[int]]) -> "IntMatrix":
        c = len(cols)
        if c == 0:
            raise DimensionError("matrix needs at least one column")
        r = len(cols[0])
        return cls.from_rows([[cols[j][i] for j in range(c)] for i in range(r)])

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def zero(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    # -- indexing ------------------------------------------------------------

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def _require_square(self, op: str):
        if not self.is_square:
            raise DimensionError("%s requires a square matrix, got %dx%d" % (op, self.rows, self.cols))

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        self._same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        self._same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(-a for a in self.entries))

    def _same_shape(self, other: "IntMatrix"):
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionError("shape mismatch: %dx%d vs %dx%d" % (self.rows, self.cols, other.rows, other.cols))

    def __mul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionError("cannot multiply %dx%d by %dx%d" % (self.rows, self.cols, other.rows, other.cols))
        out = []
        for i in range(self.rows):
            ri = self.row(i)
            for j in range(other.cols):
                out.append(sum(ri[k] * other.entries[k * other.cols + j] for k in range(self.cols)))
        return IntMatrix(self.rows, other.cols, tuple(out))

    def scale(self, k: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(k * a for a in self.entries))

    def apply(self, vec: Sequence[int]) -> tuple[int, ...]:
        """Matrix-vector product."""
        if len(vec) != self.cols:
            raise DimensionError("vector length %d does not match %d columns" % (len(vec), self.cols))
        return tuple(sum(self.row(i)[k] * vec[k] for k in range(self.cols)) for i in range(self.rows))

    def __pow__(self, k: int) -> "IntMatrix":
        self._require_square("power")
        if k < 0:
            return self.inverse_unimodular() ** (-k)
        result = IntMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def trace(self) -> int:
        self._require_square("trace")
        return sum(self[i, i] for i in range(self.rows))

    def det(self) -> int:
        self._require_square("determinant")
        return _det(self.to_rows())

    @property
    def is_unimodular(self) -> bool:
        return self.is_square and self.det() in (1, -1)

    def inverse_unimodular(self) -> "IntMatrix":
        """Exact integer inverse; only defined when det is +-1."""
        d = self.det()
        if d not in (1, -1):
            raise ValueError("matrix with determinant %d has no integer inverse" % d)
        adj = self._adjugate()
        return adj if d == 1 else -adj

    def _adjugate(self) -> "IntMatrix":
        n = self.rows
        if n == 1:
            return IntMatrix(1, 1, (1,))
        cof = []
        rows = self.to_rows()
        for i in range(n):
            for j in range(n):
                minor = [r[:j] + r[j + 1 :] for k, r in enumerate(rows) if k != i]
                cof.append((-1) ** (i + j) * _det(minor))
        # adjugate is the transposed cofactor matrix
        return IntMatrix(n, n, tuple(cof[j * n + i] for i in range(n) for j in range(n)))

    def rat_inverse(self) -> "RatMatrix":
        """Exact rational inverse of any nonsingular square matrix."""
        d = self.det()
        if d == 0:
            raise ValueError("matrix is singular")
        adj = self._adjugate()
        return RatMatrix(self.rows, self.cols, tuple(Fraction(e, d) for e in adj.entries))

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise DimensionError("row counts differ: %d vs %d" % (self.rows, other.rows))
        rows = [list(self.row(i)) + list(other.row(i)) for i in range(self.rows)]
        return IntMatrix.from_rows(rows)

    # -- text / JSON ---------------------------------------------------------

    def to_text(self) -> str:
        return ";".join(",".join(str(e) for e in self.row(i)) for i in range(self.rows))

    def __str__(self) -> str:
        return self.to_text()


def _det(rows: list[list[int]]) -> int:
    """Fraction-free (Bareiss) determinant of a list-of-lists copy."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    a = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def det(m: IntMatrix) -> int:
    """Exact determinant of a square integer matrix."""
    return m.det()


def matrix_power_sum(a: IntMatrix, k: int) -> IntMatrix:
    """Geometric sum I + A + ... + A^(k-1), extended to negative k.

    For k < 0 the defining identity (A^k - I) = (A - I) * S_k is kept, i.e.
    S_(-k) = -A^(-k) * S_k; this is what iterated conjugation exponents need.
    Computed by binary splitting, so huge k stays cheap.
    """
    a._require_square("power sum")
    n = a.rows
    if k < 0:
        return -((a ** k) * matrix_power_sum(a, -k))
    if k == 0:
        return IntMatrix.zero(n, n)
    if k == 1:
        return IntMatrix.identity(n)
    half = matrix_power_sum(a, k // 2)
    s = half + (a ** (k // 2)) * half
    if k % 2:
        s = s + a ** (k - 1)
    return s


# ---------------------------------------------------------------------------
# RatMatrix


@dataclass(frozen=True)
class RatMatrix:
    """Dense matrix of reduced fractions (Fraction keeps gcd 1, denominator > 0)."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError("entry count does not match shape")

    @classmethod
    def from_int(cls, m: IntMatrix) -> "RatMatrix":
        return cls(m.rows, m.cols, tuple(Fraction(e) for e in m.entries))

    def __getitem__(self, idx: tuple[int, int]) -> Fraction:
        i, j = idx
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def __mul__(self, other: "RatMatrix | IntMatrix") -> "RatMatrix":
        if isinstance(other, IntMatrix):
            other = RatMatrix.from_int(other)
        if self.cols != other.rows:
            raise DimensionError("cannot multiply %dx%d by %dx%d" % (self.rows, self.cols, other.rows, other.cols))
        out = []
        for i in range(self.rows):
            ri = self.row(i)
            for j in range(other.cols):
                out.append(sum(ri[k] * other.entries[k * other.cols + j] for k in range(self.cols)))
        return RatMatrix(self.rows, other.cols, tuple(out))

    def __rmul__(self, other: IntMatrix) -> "RatMatrix":
        return RatMatrix.from_int(other) * self

    @property
    def is_integral(self) -> bool:
        return all(e.denominator == 1 for e in self.entries)

    def to_int_matrix(self) -> IntMatrix:
        if not self.is_integral:
            raise ValueError("matrix has non-integral entries")
        return IntMatrix(self.rows, self.cols, tuple(int(e) for e in self.entries))


def rat_row_mul(row: Sequence[int], m: RatMatrix) -> tuple[Fraction, ...]:
    """Row vector times rational matrix."""
    if len(row) != m.rows:
        raise DimensionError("row length %d does not match %d rows" % (len(row), m.rows))
    return tuple(sum(Fraction(row[i]) * m[i, j] for i in range(m.rows)) for j in range(m.cols))


# ---------------------------------------------------------------------------
# Parsing

MINUS_SIGN = "−"  # tolerated in input, normalised to ASCII '-'


def parse_matrix(text: str) -> IntMatrix:
    """Parse "a,b;c,d" or a JSON array of arrays into an IntMatrix.

    Ragged rows are rejected; parse failures name the offending token and
    its position.
    """
    s = text.strip().replace(MINUS_SIGN, "-")
    if s.startswith("["):
        try:
            data = json.loads(s)
        except json.JSONDecodeError as exc:
            raise MatrixParseError("invalid JSON matrix at position %d: %s" % (exc.pos, exc.msg), position=exc.pos)
        if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
            raise MatrixParseError("JSON matrix must be a non-empty array of arrays")
        width = len(data[0])
        for i, r in enumerate(data):
            if len(r) != width:
                raise MatrixParseError("row %d has %d entries, expected %d" % (i + 1, len(r), width))
            for j, e in enumerate(r):
                if not isinstance(e, int) or isinstance(e, bool):
                    raise MatrixParseError(
                        "row %d, entry %d: not an integer: %r" % (i + 1, j + 1, e), token=repr(e)
                    )
        return IntMatrix.from_rows(data)
    if not s:
        raise MatrixParseError("empty matrix text")
    rows = []
    width = None
    for i, row_text in enumerate(s.split(";")):
        row = []
        for j, tok in enumerate(row_text.split(",")):
            tok = tok.strip()
            try:
                row.append(int(tok))
            except ValueError:
                raise MatrixParseError(
                    "row %d, entry %d: invalid integer %r" % (i + 1, j + 1, tok), token=tok, position=(i + 1, j + 1)
                ) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise MatrixParseError("row %d has %d entries, expected %d" % (i + 1, len(row), width))
        rows.append(row)
    return IntMatrix.from_rows(rows)


def parse_vector(text: str) -> tuple[int, ...]:
    m = parse_matrix(text)
    if m.rows != 1:
        raise MatrixParseError("expected a single row vector, got %d rows" % m.rows)
    return m.row(0)


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass(frozen=True)
class SNFResult:
    """U * M * V = D with U, V unimodular and D diagonal, d1 | d2 | ..."""

    U: IntMatrix
    D: IntMatrix
    V: IntMatrix
    elementary_divisors: tuple[int, ...]


def smith_normal_form(m: IntMatrix) -> SNFResult:
    """Smith normal form with deterministic pivoting.

    Pivot choice: smallest nonzero absolute value in the remaining
    submatrix, ties broken by row index then column index.  Diagonal
    entries are normalised non-negative, divisibility d1 | d2 | ... holds
    and zero divisors come last.
    """
    rows, cols = m.rows, m.cols
    a = m.to_rows()
    u = IntMatrix.identity(rows).to_rows()
    v = IntMatrix.identity(cols).to_rows()

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, q):
        # row_dst += q * row_src
        for k in range(cols):
            a[dst][k] += q * a[src][k]
        for k in range(rows):
            u[dst][k] += q * u[src][k]

    def add_col(src, dst, q):
        for r in a:
            r[dst] += q * r[src]
        for r in v:
            r[dst] += q * r[src]

    def negate_row(i):
        for k in range(cols):
            a[i][k] = -a[i][k]
        for k in range(rows):
            u[i][k] = -u[i][k]

    def pick_pivot(t):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                val = abs(a[i][j])
                if val and (best is None or val < best[0]):
                    best = (val, i, j)
        return best

    t = 0
    limit = min(rows, cols)
    while t < limit:
        picked = pick_pivot(t)
        if picked is None:
            break
        _, pi, pj = picked
        if pi != t:
            swap_rows(t, pi)
        if pj != t:
            swap_cols(t, pj)
        if a[t][t] < 0:
            negate_row(t)
        # Clear row t and column t; a smaller remainder becomes the new pivot.
        while True:
            progressed = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    add_row(t, i, -q)
                    if a[i][t]:
                        swap_rows(t, i)
                        progressed = True
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    add_col(t, j, -q)
                    if a[t][j]:
                        swap_cols(t, j)
                        progressed = True
            if not progressed:
                break
        # Enforce divisibility of all later entries by the pivot.
        bad = None
        piv = a[t][t]
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % piv:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            add_row(bad, t, 1)
            continue
        t += 1

    dmat = IntMatrix.from_rows(a)
    divisors = tuple(a[i][i] for i in range(limit))
    return SNFResult(IntMatrix.from_rows(u), dmat, IntMatrix.from_rows(v), divisors)


def kernel_lattice(m: IntMatrix) -> "LatticeBasis":
    """Saturated basis of the integer kernel {v : M v = 0}.

    The kernel basis consists of the columns of V at zero-divisor
    positions; since V is unimodular this basis is automatically
    saturated.
    """
    snf = smith_normal_form(m)
    limit = min(m.rows, m.cols)
    basis = []
    for j in range(m.cols):
        if j >= limit or snf.elementary_divisors[j] == 0:
            basis.append(snf.V.column(j))
    return LatticeBasis(m.cols, tuple(basis))


# ---------------------------------------------------------------------------
# Eigen machinery


@dataclass(frozen=True)
class LatticeBasis:
    """Basis of a saturated sublattice of Z^ambient_dim (possibly empty)."""

    ambient_dim: int
    basis: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def matrix(self) -> IntMatrix | None:
        if not self.basis:
            return None
        return IntMatrix.from_columns(self.basis)


KIND_REPEATED_ONE = "repeated-one"
KIND_REPEATED_MINUS_ONE = "repeated-minus-one"
KIND_ONE_MINUS_ONE = "one-plus-minus-one"
KIND_REAL_PAIR = "real-irrational-pair"
KIND_COMPLEX_PAIR = "complex-pair"
KIND_MIXED3 = "mixed-3"

TAG_PLUS_ONE = "+1"
TAG_MINUS_ONE = "-1"
TAG_REAL_PAIR = "real-pair"
TAG_COMPLEX_PAIR = "complex-pair"


@dataclass(frozen=True)
class EigenProfile:
    """Symbolic eigenvalue data of a 2x2 or 3x3 unimodular matrix.

    ``char_poly`` lists the coefficients of det(xI - M) in ascending
    order a0..a_dim.  For dim 3 the kind is always ``mixed-3`` and
    ``components`` records the multiset of integer roots (+-1) and the
    class of the residual quadratic.  ``residual`` holds (c0, c1) for the
    monic residual x^2 + c1 x + c0 when one exists.
    """

    dim: int
    char_poly: tuple[int, ...]
    det: int
    trace: int
    kind: str
    components: tuple[str, ...] | None
    residual: tuple[int, int] | None
    finite_order: int | None

    def multiplicity_of_one(self) -> int:
        if self.dim == 2:
            return {KIND_REPEATED_ONE: 2, KIND_ONE_MINUS_ONE: 1}.get(self.kind, 0)
        return self.components.count(TAG_PLUS_ONE)

    def multiplicity_of_minus_one(self) -> int:
        if self.dim == 2:
            return {KIND_REPEATED_MINUS_ONE: 2, KIND_ONE_MINUS_ONE: 1}.get(self.kind, 0)
        return self.components.count(TAG_MINUS_ONE)

    def char_poly_at(self, x: int) -> int:
        return sum(c * x ** i for i, c in enumerate(self.char_poly))


def char_poly(m: IntMatrix) -> tuple[int, ...]:
    """Coefficients of det(xI - M), ascending, for dim <= 3."""
    m._require_square("characteristic polynomial")
    n = m.rows
    if n == 1:
        return (-m[0, 0], 1)
    if n == 2:
        return (m.det(), -m.trace(), 1)
    if n == 3:
        s2 = sum(
            m[i, i] * m[j, j] - m[i, j] * m[j, i]
            for i in range(3)
            for j in range(i + 1, 3)
        )
        return (-m.det(), s2, -m.trace(), 1)
    raise DimensionError("characteristic polynomial implemented for dim <= 3 only")


def finite_order(m: IntMatrix) -> int | None:
    """Order of M if M^d = I for some d in 1..6, else None.

    In GL2(Z) and GL3(Z) every finite element order lies in {1,2,3,4,6},
    so the direct check is complete for dim <= 3.
    """
    m._require_square("finite order")
    if m.rows > 3:
        raise DimensionError("finite order check is only valid for dim <= 3")
    if m.det() not in (1, -1):
        raise ValueError("finite order requires a unimodular matrix")
    ident = IntMatrix.identity(m.rows)
    power = ident
    for d in range(1, 7):
        power = power * m
        if power == ident:
            return d
    return None


def eigenvalue_profile(m: IntMatrix) -> EigenProfile:
    """Classify the eigenvalues of a 2x2 or 3x3 matrix with det +-1.

    Candidate integer roots of a unimodular characteristic polynomial are
    +-1; everything else is decided by discriminant sign.
    """
    m._require_square("eigenvalue profile")
    d = m.det()
    if d not in (1, -1):
        raise ValueError("eigenvalue profile requires determinant +-1, got %d" % d)
    if m.rows not in (2, 3):
        raise DimensionError("eigenvalue profile implemented for dim 2 and 3 only")
    poly = char_poly(m)
    tr = m.trace()
    order = finite_order(m)

    if m.rows == 2:
        disc = tr * tr - 4 * d
        if d == 1 and tr == 2:
            kind = KIND_REPEATED_ONE
        elif d == 1 and tr == -2:
            kind = KIND_REPEATED_MINUS_ONE
        elif d == -1 and tr == 0:
            kind = KIND_ONE_MINUS_ONE
        elif disc < 0:
            kind = KIND_COMPLEX_PAIR
        else:
            kind = KIND_REAL_PAIR
        return EigenProfile(2, poly, d, tr, kind, None, None, order)

    # dim 3: peel off integer roots (only +-1 possible), classify the rest.
    coeffs = list(poly)
    roots: list[int] = []
    changed = True
    while len(coeffs) > 1 and changed:
        changed = False
        for cand in (1, -1):
            if sum(c * cand ** i for i, c in enumerate(coeffs)) == 0:
                coeffs = _deflate(coeffs, cand)
                roots.append(cand)
                changed = True
                break
    tags = [TAG_PLUS_ONE if r == 1 else TAG_MINUS_ONE for r in roots]
    residual = None
    if len(coeffs) == 3:
        c0, c1, _ = coeffs
        residual = (c0, c1)
        disc = c1 * c1 - 4 * c0
        # A monic integer quadratic without +-1 roots cannot have rational
        # roots here (any rational root would divide c0 = +-1), so disc != 0.
        tags.append(TAG_COMPLEX_PAIR if disc < 0 else TAG_REAL_PAIR)
    components = tuple(sorted(tags))
    return EigenProfile(3, poly, d, tr, KIND_MIXED3, components, residual, order)


def _deflate(coeffs: list[int], root: int) -> list[int]:
    """Synthetic division of a monic polynomial by (x - root)."""
    n = len(coeffs) - 1
    out = [0] * n
    out[n - 1] = coeffs[n]
    for i in range(n - 2, -1, -1):
        out[i] = coeffs[i + 1] + root * out[i + 1]
    return out


def eigenlattice(a: IntMatrix, eps: int) -> LatticeBasis:
    """Saturated basis of W_eps = {z in Z^n : A z = eps z} for eps = +-1."""
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    a._require_square("eigenlattice")
    if not a.is_unimodular:
        raise ValueError("eigenlattice requires a unimodular matrix")
    shifted = a - IntMatrix.identity(a.rows).scale(eps)
    return kernel_lattice(shifted)


def in_centralizer_span(m: IntMatrix, x: IntMatrix) -> bool:
    """Whether X = +-M^k for some k; M must have finite order and M != +-I.

    For finite-order M != +-I in GL2(Z), the centralizer is exactly the
    finite set {+-M^k}, so exhaustive comparison decides membership.
    """
    if m.rows != 2 or x.rows != 2 or not m.is_square or not x.is_square:
        raise DimensionError("centralizer-span check is for 2x2 matrices")
    ident = IntMatrix.identity(2)
    if m == ident or m == -ident:
        raise ValueError("M must differ from +-I")
    order = finite_order(m)
    if order is None:
        raise ValueError("M must have finite order")
    power = ident
    for _ in range(order):
        if x == power or x == -power:
            return True
        power = power * m
    return False


def lattice_membership(target: Sequence[int], generators: IntMatrix) -> tuple[int, ...] | None:
    """Solve generators * c = target over the integers, or return None.

    Solved through the Smith normal form; when no solution exists some
    elementary divisor fails to divide the transformed target (or a rank
    constraint fails), which certifies absence.
    """
    target = tuple(int(t) for t in target)
    if len(target) != generators.rows:
        raise DimensionError(
            "target length %d does not match ambient dimension %d" % (len(target), generators.rows)
        )
    snf = smith_normal_form(generators)
    s = snf.U.apply(target)
    limit = min(generators.rows, generators.cols)
    w = [0] * generators.cols
    for i in range(generators.rows):
        if i < limit and snf.elementary_divisors[i] != 0:
            di = snf.elementary_divisors[i]
            if s[i] % di:
                return None
            w[i] = s[i] // di
        elif s[i] != 0:
            return None
    return snf.V.apply(w)


def coset_representatives(m: IntMatrix) -> list[tuple[int, ...]] | None:
    """Representatives of Z^n / (image of M), or None when the index is infinite.

    With U M V = D, the image of M is U^-1 (D Z^n), so U^-1 applied to the
    box {0 <= x_i < d_i} is a transversal.
    """
    m._require_square("coset enumeration")
    snf = smith_normal_form(m)
    if any(d == 0 for d in snf.elementary_divisors):
        return None
    uinv = snf.U.inverse_unimodular()
    reps: list[tuple[int, ...]] = []

    def rec(prefix: list[int], i: int):
        if i == len(snf.elementary_divisors):
            reps.append(uinv.apply(prefix))
            return
        for val in range(snf.elementary_divisors[i]):
            rec(prefix + [val], i + 1)

    rec([], 0)
    return reps
