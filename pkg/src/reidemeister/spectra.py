"""The classification ladder: from a group description to its spectrum.

Each classifier walks a case analysis on the eigenvalues of the acting
matrix and returns a ``SpectrumResult``: the spectrum descriptor plus a
derivation trace of rule identifiers, so a result can be audited without
re-reading the code.

Bounded searches never masquerade as proofs.  A hyperbolic case that
exhausts its search bound comes back ``undecided`` unless a genuine
obstruction applies: non-real eigenvalues, determinant -1, or the
residue-class (parity) obstruction, which enumerates the finitely many
residue classes that solutions of the quadratic system can occupy and
checks that the integrality constraint fails on every one of them.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Iterator, Mapping, Sequence

from .exactlin import (
    IntMatrix,
    KIND_COMPLEX_PAIR,
    KIND_ONE_MINUS_ONE,
    KIND_REAL_PAIR,
    KIND_REPEATED_MINUS_ONE,
    KIND_REPEATED_ONE,
    TAG_COMPLEX_PAIR,
    eigenlattice,
    eigenvalue_profile,
    finite_order,
    kernel_lattice,
    lattice_membership,
    rat_row_mul,
    smith_normal_form,
)
from .groups import AutomorphismSpec, Heisenberg, _mpow, _msum, verify_automorphism


class HypothesisError(ValueError):
    """The input violates the case hypotheses of the requested decision."""


RESIDUE_MODULUS_GATE = 24  # largest modulus the residue obstruction will enumerate
ORBIT_DEPTH = 8  # powers of A mixed into the witness orbit during searches
WITNESS_ENUM_LIMIT = 200  # solutions drawn from the quadratic system per search


# ---------------------------------------------------------------------------
# Spectrum descriptors


@dataclass(frozen=True)
class SpectrumDescriptor:
    """Canonical encoding of a Reidemeister spectrum.

    kind is one of r_infinity | finite | multiples | full | undecided;
    infinity is implied present in every kind.
    """

    kind: str
    values: tuple[int, ...] | None = None
    c: int | None = None
    candidates: tuple["SpectrumDescriptor", ...] | None = None
    bound: int | None = None

    @classmethod
    def r_infinity(cls) -> "SpectrumDescriptor":
        return cls("r_infinity")

    @classmethod
    def finite(cls, values: Sequence[int]) -> "SpectrumDescriptor":
        vals = tuple(sorted(set(int(v) for v in values)))
        if not vals or vals[0] < 1:
            raise ValueError("finite spectra need a nonempty set of positive values")
        return cls("finite", values=vals)

    @classmethod
    def multiples(cls, c: int) -> "SpectrumDescriptor":
        if c < 2:
            raise ValueError("multiples spectra need c >= 2")
        return cls("multiples", c=c)

    @classmethod
    def full(cls) -> "SpectrumDescriptor":
        return cls("full")

    @classmethod
    def undecided(cls, candidates: Sequence["SpectrumDescriptor"], bound: int) -> "SpectrumDescriptor":
        cands = tuple(candidates)
        if len(cands) != 2:
            raise ValueError("undecided spectra record exactly two candidates")
        return cls("undecided", candidates=cands, bound=bound)

    def to_json_dict(self) -> dict:
        if self.kind == "r_infinity":
            return {"kind": "r_infinity"}
        if self.kind == "finite":
            return {"kind": "finite", "values": list(self.values)}
        if self.kind == "multiples":
            return {"kind": "multiples", "c": self.c}
        if self.kind == "full":
            return {"kind": "full"}
        if self.kind == "undecided":
            return {
                "kind": "undecided",
                "candidates": [c.to_json_dict() for c in self.candidates],
                "bound": self.bound,
            }
        raise ValueError("unknown spectrum kind %r" % self.kind)

    def render(self) -> str:
        if self.kind == "r_infinity":
            return "{oo}"
        if self.kind == "finite":
            return "{%s,oo}" % ",".join(str(v) for v in self.values)
        if self.kind == "multiples":
            return "%dN u {oo}" % self.c
        if self.kind == "full":
            return "N u {oo}"
        if self.kind == "undecided":
            return "undecided(%s | %s, bound %d)" % (
                self.candidates[0].render(),
                self.candidates[1].render(),
                self.bound,
            )
        raise ValueError("unknown spectrum kind %r" % self.kind)


@dataclass(frozen=True)
class SpectrumResult:
    spectrum: SpectrumDescriptor
    trace: tuple[str, ...]
    evidence: Mapping | None = None

    def __post_init__(self):
        if not self.trace:
            raise ValueError("classifier results must carry a nonempty trace")


def _result(spectrum, trace, evidence=None) -> SpectrumResult:
    return SpectrumResult(spectrum, tuple(trace), evidence)


def _undecided_or_eight(bound: int) -> SpectrumDescriptor:
    return SpectrumDescriptor.undecided(
        (SpectrumDescriptor.r_infinity(), SpectrumDescriptor.finite([8])), bound
    )


def _undecided_or_four(bound: int) -> SpectrumDescriptor:
    return SpectrumDescriptor.undecided(
        (SpectrumDescriptor.r_infinity(), SpectrumDescriptor.finite([4])), bound
    )


# ---------------------------------------------------------------------------
# The quadratic system for Z^2 x|_A Z


@dataclass(frozen=True)
class System2Witness:
    """A solution (m, n, p) of -m^2 - np = 1, (a-d)m + bp + cn = 0."""

    m: int
    n: int
    p: int

    def __post_init__(self):
        if -self.m * self.m - self.n * self.p != 1:
            raise ValueError("witness fails -m^2 - np = 1")

    @property
    def matrix(self) -> IntMatrix:
        return IntMatrix.from_rows([[self.m, self.n], [self.p, -self.m]])

    def to_json_dict(self) -> dict:
        return {"m": self.m, "n": self.n, "p": self.p, "matrix": self.matrix.to_rows()}


@dataclass(frozen=True)
class System2Decision:
    outcome: str  # "witness" | "none-up-to-bound" | "proven-empty"
    witness: System2Witness | None
    bound: int


def _divisors(k: int) -> list[int]:
    # trial division is fine while isqrt(k) is small; sympy takes over for
    # the deep end of a large search bound
    if k <= 250_000:
        small, large = [], []
        d = 1
        while d * d <= k:
            if k % d == 0:
                small.append(d)
                if d * d != k:
                    large.append(k // d)
            d += 1
        return small + large[::-1]
    from sympy import divisors as sympy_divisors

    return list(sympy_divisors(k))


def _search_m_order(bound: int) -> Iterator[int]:
    yield 0
    for m in range(1, bound + 1):
        yield -m
        yield m


def _system2_require(a: IntMatrix):
    if a.rows != 2 or a.cols != 2:
        raise HypothesisError("the quadratic system is defined for 2x2 matrices")
    if a.det() != 1:
        raise HypothesisError("determinant must be 1; determinant -1 forces the infinite spectrum")
    if a.trace() in (2, -2):
        raise HypothesisError("eigenvalue +-1 is outside the hyperbolic case")


def _system2_solutions(a: IntMatrix, bound: int) -> Iterator[System2Witness]:
    """All solutions with |m| <= bound, in deterministic order: m walks
    0, -1, 1, -2, 2, ... and (n, p) ascends lexicographically per m."""
    aa, bb, cc, dd = a[0, 0], a[0, 1], a[1, 0], a[1, 1]
    for m in _search_m_order(bound):
        k = 1 + m * m
        found = []
        for d in _divisors(k):
            for n, p in ((d, -(k // d)), (-d, k // d)):
                if (aa - dd) * m + bb * p + cc * n == 0:
                    found.append((n, p))
        for n, p in sorted(found):
            yield System2Witness(m, n, p)


def decide_system2(a: IntMatrix, bound: int) -> System2Decision:
    """Decide the quadratic system for A up to the given |m| bound.

    Non-real eigenvalues prove the system empty without a search; a real
    search is complete in m up to the bound, enumerating divisor pairs of
    1 + m^2 for (n, p).  The first solution in the deterministic order is
    the one reported.
    """
    _system2_require(a)
    if bound < 1:
        raise ValueError("bound must be >= 1")
    tr = a.trace()
    if tr * tr - 4 < 0:
        return System2Decision("proven-empty", None, bound)
    for wit in _system2_solutions(a, bound):
        return System2Decision("witness", wit, bound)
    return System2Decision("none-up-to-bound", None, bound)


def _feasible_residues(a: IntMatrix, modulus: int) -> list[tuple[int, int, int]]:
    """Residues (m, n, p) mod modulus compatible with both equations.

    Every integral solution reduces into this set, so a property failing
    on all of it fails for every solution; that is the whole content of
    the residue obstruction.
    """
    aa, bb, cc, dd = a[0, 0], a[0, 1], a[1, 0], a[1, 1]
    out = []
    for m in range(modulus):
        for n in range(modulus):
            for p in range(modulus):
                if (-m * m - n * p - 1) % modulus:
                    continue
                if ((aa - dd) * m + bb * p + cc * n) % modulus:
                    continue
                out.append((m, n, p))
    return out


# ---------------------------------------------------------------------------
# dimension 3: Z^2 x|_A Z


def classify_z2_semidirect(a: IntMatrix, bound: int) -> SpectrumResult:
    """Spectrum of Z^2 x|_A Z by the eigenvalue case ladder."""
    if a.rows != 2 or not a.is_square:
        raise HypothesisError("expected a 2x2 matrix")
    if a.det() not in (1, -1):
        raise HypothesisError("the acting matrix must be unimodular")
    ident = IntMatrix.identity(2)
    profile = eigenvalue_profile(a)

    if profile.kind == KIND_REPEATED_ONE:
        if a == ident:
            return _result(SpectrumDescriptor.full(), ["z2:abelian", "nilpotent:lattice"])
        divisors = smith_normal_form(a - ident).elementary_divisors
        n = next(d for d in divisors if d)
        return _result(
            SpectrumDescriptor.multiples(2),
            ["z2:unipotent", "nilpotent:heisenberg"],
            {"heisenberg_parameter": n},
        )
    if profile.kind == KIND_REPEATED_MINUS_ONE:
        if a == -ident:
            return _result(SpectrumDescriptor.multiples(2), ["z2:minus-identity"])
        return _result(SpectrumDescriptor.r_infinity(), ["z2:repeated-minus-one"])
    if profile.kind == KIND_ONE_MINUS_ONE:
        return _result(SpectrumDescriptor.r_infinity(), ["z2:eigenvalues-one-and-minus-one"])
    if profile.kind == KIND_COMPLEX_PAIR:
        return _result(
            SpectrumDescriptor.r_infinity(), ["z2:complex-eigenvalues", "system2:complex-empty"]
        )
    # real eigenvalues different from +-1
    if a.det() == -1:
        return _result(SpectrumDescriptor.r_infinity(), ["z2:hyperbolic-det-minus-one"])
    decision = decide_system2(a, bound)
    if decision.outcome == "witness":
        return _result(
            SpectrumDescriptor.finite([4]),
            ["z2:hyperbolic", "system2:witness"],
            {"witness": decision.witness.to_json_dict()},
        )
    if decision.outcome == "proven-empty":
        return _result(SpectrumDescriptor.r_infinity(), ["z2:hyperbolic", "system2:proven-empty"])
    return _result(_undecided_or_four(bound), ["z2:hyperbolic", "system2:exhausted"])


# ---------------------------------------------------------------------------
# Tahara delta invariant


def tahara_delta(a: IntMatrix) -> int:
    """The 0/1 invariant of the order-2 and order-3 canonical forms.

    delta = 0 exactly when the fixed lattice of the eigenvalue 1 and the
    saturated invariant complement span all of Z^3 (index 1); otherwise
    delta = 1.  Requires a simple eigenvalue 1 and a complementary block
    of finite order 2 or 3.
    """
    if a.rows != 3 or a.cols != 3:
        raise HypothesisError("the delta invariant lives on 3x3 matrices")
    if not a.is_unimodular:
        raise HypothesisError("the matrix must be unimodular")
    profile = eigenvalue_profile(a)
    if profile.multiplicity_of_one() != 1:
        raise HypothesisError("eigenvalue 1 must be simple")
    order = finite_order(a)
    if order not in (2, 3):
        raise HypothesisError("the complementary block must have order 2 or 3")
    ident = IntMatrix.identity(3)
    w1 = eigenlattice(a, 1)
    if order == 2:
        complement = kernel_lattice(a + ident)
    else:
        complement = kernel_lattice(a * a + a + ident)
    if w1.rank != 1 or complement.rank != 2:
        raise HypothesisError("unexpected eigenlattice ranks for a canonical finite-order form")
    cols = [w1.basis[0], complement.basis[0], complement.basis[1]]
    index = abs(IntMatrix.from_columns(cols).det())
    return 0 if index == 1 else 1


# ---------------------------------------------------------------------------
# dimension 4: Z^3 x|_A Z, hyperbolic block decision


@dataclass(frozen=True)
class Z3EightDecision:
    outcome: str  # "eight" | "r-infinity" | "undecided"
    witness: System2Witness | None
    n_row: tuple[int, int] | None
    bound: int
    obstruction_modulus: int | None = None


def _orbit_of(q: IntMatrix, a: IntMatrix) -> Iterator[IntMatrix]:
    # plain witness first, then powers of A by growing distance
    yield q
    yield -q
    for j in range(1, ORBIT_DEPTH + 1):
        for jj in (j, -j):
            base = _mpow(a, jj) * q
            yield base
            yield -base


def decide_z3_eight(a_prime: IntMatrix, c_row: Sequence[int], bound: int) -> Z3EightDecision:
    """Decide between eight classes and the infinite spectrum for the
    block form (1, C; 0, A') with hyperbolic A' of determinant 1.

    An automorphism with eight classes exists iff some Q solving
    A' Q A' = Q makes C (I - Q A') (I - A')^-1 integral.  The search runs
    over bounded solutions and their +-A'-power orbit; emptiness is only
    claimed via the residue obstruction, never from bounded failure.
    """
    _system2_require(a_prime)
    profile = eigenvalue_profile(a_prime)
    if profile.kind != KIND_REAL_PAIR:
        raise HypothesisError("the block must have real eigenvalues different from +-1")
    c_row = tuple(int(v) for v in c_row)
    if len(c_row) != 2:
        raise HypothesisError("the coupling row must have two entries")
    ident = IntMatrix.identity(2)
    inv = (ident - a_prime).rat_inverse()

    seen: set[IntMatrix] = set()
    count = 0
    for wit in _system2_solutions(a_prime, bound):
        count += 1
        if count > WITNESS_ENUM_LIMIT:
            break
        for q in _orbit_of(wit.matrix, a_prime):
            if q in seen:
                continue
            seen.add(q)
            row = rat_row_mul(
                (ident - q * a_prime).transpose().apply(c_row),  # C (I - Q A') as a row
                inv,
            )
            if all(v.denominator == 1 for v in row):
                base = _to_witness(q)
                return Z3EightDecision("eight", base, tuple(int(v) for v in row), bound)

    # bounded failure: try to prove emptiness on residue classes
    det_shift = (ident - a_prime).det()
    modulus = _lcm(8, abs(det_shift))
    if modulus <= RESIDUE_MODULUS_GATE:
        adj = (ident - a_prime)._adjugate()
        dmod = abs(det_shift)
        all_fail = True
        for m, n, p in _feasible_residues(a_prime, modulus):
            q = IntMatrix.from_rows([[m, n], [p, -m]])
            # integrality of C (I - Q A') (I - A')^-1 depends only on the
            # residue of Q modulo det(I - A')
            row = (ident - q * a_prime).transpose().apply(c_row)
            combo = adj.transpose().apply(row)
            if all(v % dmod == 0 for v in combo):
                all_fail = False
                break
        if all_fail:
            return Z3EightDecision("r-infinity", None, None, bound, obstruction_modulus=modulus)
    return Z3EightDecision("undecided", None, None, bound)


def _to_witness(q: IntMatrix) -> System2Witness:
    return System2Witness(q[0, 0], q[0, 1], q[1, 0])


def _lcm(a: int, b: int) -> int:
    return abs(a * b) // math.gcd(a, b) if a and b else max(abs(a), abs(b))


def _simple_one_block(a: IntMatrix) -> tuple[IntMatrix, tuple[int, int]]:
    """Change basis so A takes the form (1, C; 0, A'); returns (A', C).

    The first basis vector is the primitive eigenvector of 1, extended to
    a unimodular basis through the Smith transform of the column.
    """
    w1 = eigenlattice(a, 1)
    if w1.rank != 1:
        raise HypothesisError("eigenvalue 1 must be simple")
    v = w1.basis[0]
    col = IntMatrix.from_columns([v])
    snf = smith_normal_form(col)
    # U v = e1 for a primitive column, so U^-1 has v as first column
    p = snf.U.inverse_unimodular()
    if snf.D.column(0) != (1, 0, 0):
        raise HypothesisError("eigenvector is not primitive")
    b = snf.U * a * p
    a_prime = IntMatrix.from_rows([[b[1, 1], b[1, 2]], [b[2, 1], b[2, 2]]])
    c_row = (b[0, 1], b[0, 2])
    if (b[1, 0], b[2, 0]) != (0, 0) or b[0, 0] != 1:
        raise AssertionError("basis change failed to produce the block form")
    return a_prime, c_row


def classify_z3_semidirect(a: IntMatrix, bound: int) -> SpectrumResult:
    """Spectrum of Z^3 x|_A Z by the eigenvalue case ladder."""
    if a.rows != 3 or not a.is_square:
        raise HypothesisError("expected a 3x3 matrix")
    if a.det() not in (1, -1):
        raise HypothesisError("the acting matrix must be unimodular")
    ident = IntMatrix.identity(3)
    profile = eigenvalue_profile(a)
    mult_one = profile.multiplicity_of_one()

    if mult_one == 0:
        if a == -ident:
            return _result(SpectrumDescriptor.multiples(2), ["z3:minus-identity"])
        return _result(SpectrumDescriptor.r_infinity(), ["z3:no-eigenvalue-one"])

    if mult_one == 3:
        if a == ident:
            return _result(SpectrumDescriptor.full(), ["z3:abelian", "nilpotent:lattice"])
        shifted = a - ident
        if shifted * shifted == IntMatrix.zero(3, 3):
            return _result(
                SpectrumDescriptor.multiples(4),
                ["z3:unipotent-two-step", "nilpotent:heisenberg-times-z"],
            )
        return _result(
            SpectrumDescriptor.r_infinity(), ["z3:unipotent-three-step", "nilpotent:three-step"]
        )

    if mult_one == 2:
        return _result(SpectrumDescriptor.r_infinity(), ["z3:eigenvalue-one-multiplicity-two"])

    # simple eigenvalue 1
    if profile.multiplicity_of_minus_one() == 2:
        if finite_order(a) == 2:
            delta = tahara_delta(a)
            if delta == 0:
                return _result(
                    SpectrumDescriptor.multiples(2),
                    ["z3:order-two-block", "tahara:delta-zero"],
                    {"delta": 0},
                )
            return _result(
                SpectrumDescriptor.multiples(4),
                ["z3:order-two-block", "tahara:delta-one"],
                {"delta": 1},
            )
        return _result(SpectrumDescriptor.r_infinity(), ["z3:minus-one-unipotent-block"])

    c0, c1 = profile.residual
    if TAG_COMPLEX_PAIR in profile.components:
        block_trace = -c1
        if block_trace == -1:  # block order 3
            delta = tahara_delta(a)
            return _result(
                SpectrumDescriptor.multiples(6),
                ["z3:order-three-block", "tahara:delta-%d" % delta],
                {"delta": delta},
            )
        return _result(SpectrumDescriptor.r_infinity(), ["z3:block-order-four-or-six"])

    # hyperbolic residual block
    if c0 == -1:
        return _result(SpectrumDescriptor.r_infinity(), ["z3:hyperbolic-block-det-minus-one"])
    a_prime, c_row = _simple_one_block(a)
    decision = decide_z3_eight(a_prime, c_row, bound)
    if decision.outcome == "eight":
        return _result(
            SpectrumDescriptor.finite([8]),
            ["z3:hyperbolic-block", "z3:eight-witness"],
            {"witness": decision.witness.to_json_dict(), "coupling_row": list(c_row)},
        )
    if decision.outcome == "r-infinity":
        return _result(
            SpectrumDescriptor.r_infinity(),
            ["z3:hyperbolic-block", "z3:parity-obstruction"],
            {"obstruction_modulus": decision.obstruction_modulus},
        )
    return _result(_undecided_or_eight(bound), ["z3:hyperbolic-block", "z3:search-exhausted"])


# ---------------------------------------------------------------------------
# Extensions of Z^2 by Z^2: presentation data and canonicalization


@dataclass(frozen=True)
class Substitution:
    """A unimodular change of the quotient generators.

    ``matrix`` rows express the new generators in the old ones:
    x' = x^T[0,0] y^T[0,1], y' = x^T[1,0] y^T[1,1].
    """

    matrix: IntMatrix
    label: str

    def __post_init__(self):
        if not self.matrix.is_unimodular or self.matrix.rows != 2:
            raise ValueError("substitutions must be unimodular 2x2")


@dataclass(frozen=True)
class ExtensionPresentation:
    """Data of an extension of Z^2 by Z^2.

    The quotient generators x, y act on the kernel by ``action_x`` and
    ``action_y``; ``n0`` is the kernel part of the commutator of the
    chosen lifts, [lift(x), lift(y)].
    """

    action_x: IntMatrix
    action_y: IntMatrix
    n0: tuple[int, int]
    change_log: tuple[Substitution, ...] = ()

    def __post_init__(self):
        a, b = self.action_x, self.action_y
        if a.rows != 2 or b.rows != 2 or not a.is_unimodular or not b.is_unimodular:
            raise ValueError("actions must be unimodular 2x2 matrices")
        if a * b != b * a:
            raise ValueError("the two actions must commute")
        object.__setattr__(self, "n0", tuple(int(v) for v in self.n0))


def _ext_mul(pres: ExtensionPresentation, g: tuple, h: tuple) -> tuple:
    # elements (z1, z2, k, l) = z t^k u^l with t = lift(y), u = lift(x)
    a, b, n0 = pres.action_x, pres.action_y, pres.n0
    z1, k1, l1 = g[:2], g[2], g[3]
    z2, k2, l2 = h[:2], h[2], h[3]
    w = _mpow(a, l1).apply(z2)
    shift = _msum(b, k2).apply(_msum(a, l1).apply(n0))
    w = (w[0] + shift[0], w[1] + shift[1])
    moved = _mpow(b, k1).apply(w)
    return (z1[0] + moved[0], z1[1] + moved[1], k1 + k2, l1 + l2)


def _ext_inv(pres: ExtensionPresentation, g: tuple) -> tuple:
    a, b, n0 = pres.action_x, pres.action_y, pres.n0
    z, k, l = g[:2], g[2], g[3]
    back = _mpow(b, -k).apply(z)
    shift = _msum(b, -k).apply(_msum(a, l).apply(n0))
    w = (-back[0] - shift[0], -back[1] - shift[1])
    out = _mpow(a, -l).apply(w)
    return (out[0], out[1], -k, -l)


def _ext_word(pres: ExtensionPresentation, x_exp: int, y_exp: int) -> tuple:
    """The plain-word lift u^x_exp t^y_exp as an extension element."""
    u = (0, 0, 0, 1)
    t = (0, 0, 1, 0)
    out = (0, 0, 0, 0)
    step = u if x_exp >= 0 else _ext_inv(pres, u)
    for _ in range(abs(x_exp)):
        out = _ext_mul(pres, out, step)
    step = t if y_exp >= 0 else _ext_inv(pres, t)
    for _ in range(abs(y_exp)):
        out = _ext_mul(pres, out, step)
    return out


def apply_substitution(pres: ExtensionPresentation, sub: Substitution) -> ExtensionPresentation:
    """Rewrite the presentation in the substituted quotient generators."""
    t = sub.matrix
    a, b = pres.action_x, pres.action_y
    new_a = _mpow(a, t[0, 0]) * _mpow(b, t[0, 1])
    new_b = _mpow(a, t[1, 0]) * _mpow(b, t[1, 1])
    u_new = _ext_word(pres, t[0, 0], t[0, 1])
    t_new = _ext_word(pres, t[1, 0], t[1, 1])
    comm = _ext_mul(
        pres,
        _ext_mul(pres, u_new, t_new),
        _ext_mul(pres, _ext_inv(pres, u_new), _ext_inv(pres, t_new)),
    )
    if comm[2] or comm[3]:
        raise AssertionError("commutator of lifted generators left the kernel")
    return ExtensionPresentation(new_a, new_b, (comm[0], comm[1]), pres.change_log + (sub,))


def _find_power_match(base: IntMatrix, target: IntMatrix, order: int) -> int | None:
    """k with target = +-base^k, searching k = 0..order-1; None if absent."""
    power = IntMatrix.identity(2)
    for k in range(order):
        if target == power or target == -power:
            return k
        power = power * base
    return None


def canonicalize_z2_by_z2(pres: ExtensionPresentation) -> ExtensionPresentation:
    """Drive the quotient generators into one of the canonical situations:

    1. action_y = I;
    2. action_y = -I with action_x of infinite order;
    3. action_y = -I with action_x != +-I of order 2.

    Every substitution is appended to the change log, so replaying the
    log on the input reproduces the output exactly.
    """
    ident = IntMatrix.identity(2)
    current = pres
    for _ in range(20):
        a, b = current.action_x, current.action_y
        if b == ident:
            return current
        if b == -ident:
            if a == ident:
                current = apply_substitution(current, Substitution(IntMatrix.from_rows([[0, 1], [1, 0]]), "swap x and y"))
                continue
            if a == -ident:
                current = apply_substitution(current, Substitution(IntMatrix.from_rows([[1, 0], [1, 1]]), "y -> x y"))
                continue
            order = finite_order(a)
            if order is None or order == 2:
                return current
            if order == 3:
                current = apply_substitution(current, Substitution(IntMatrix.from_rows([[1, 1], [0, 1]]), "x -> x y"))
                continue
            half = order // 2  # order 4 or 6: a^(order/2) = -I
            current = apply_substitution(
                current,
                Substitution(IntMatrix.from_rows([[1, 0], [half, 1]]), "y -> x^%d y" % half),
            )
            continue
        # action_y differs from +-I
        if a in (ident, -ident):
            current = apply_substitution(current, Substitution(IntMatrix.from_rows([[0, 1], [1, 0]]), "swap x and y"))
            continue
        order_a = finite_order(a)
        if order_a is not None:
            # commuting with a finite-order matrix != +-I forces B = +-A^k
            k = _find_power_match(a, b, order_a)
            if k is None:
                raise ValueError("commuting pair violates the finite centralizer structure")
            current = apply_substitution(
                current,
                Substitution(IntMatrix.from_rows([[1, 0], [-k, 1]]), "y -> x^-%d y" % k),
            )
            continue
        if finite_order(b) is not None:
            # a finite-order B != +-I would force A into a finite
            # centralizer, contradicting its infinite order
            raise ValueError("commuting pair violates the finite centralizer structure")
        found = _find_torsion_direction(a, b)
        if found is None:
            raise ValueError("canonicalization search exhausted; no torsion direction found")
        i, j = found
        g, s, t = _xgcd(i, j)
        # rows (t, -s) and (i, j) have determinant ti + sj = 1
        sub = Substitution(IntMatrix.from_rows([[t, -s], [i, j]]), "y -> x^%d y^%d" % (i, j))
        current = apply_substitution(current, sub)
    raise AssertionError("canonicalization did not terminate")


def _find_torsion_direction(a: IntMatrix, b: IntMatrix) -> tuple[int, int] | None:
    """Smallest (i, j) != 0 with A^i B^j = +-I, by expanding diamonds.

    For two commuting infinite-order matrices the set of such pairs is a
    rank-1 subgroup whose diamond-minimal element is a primitive vector.
    """
    ident = IntMatrix.identity(2)
    for radius in range(1, 31):
        for i in range(-radius, radius + 1):
            j_abs = radius - abs(i)
            for j in ({j_abs, -j_abs} if j_abs else {0}):
                if i == 0 and j == 0:
                    continue
                m = _mpow(a, i) * _mpow(b, j)
                if m == ident or m == -ident:
                    return (i, j)
    return None


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """g, s, t with g = s*a + t*b."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


# ---------------------------------------------------------------------------
# dimension 4: the double extension (Z^2 x|_{-I} Z) x|_psi Z


def classify_z2_minusI_ext(a: IntMatrix, n0: Sequence[int], bound: int) -> SpectrumResult:
    """Spectrum of (Z^2 x|_{-I} Z) x|_psi Z with psi acting by A and
    twisting the inner generator by n0."""
    if a.rows != 2 or not a.is_unimodular:
        raise HypothesisError("the outer action must be a unimodular 2x2 matrix")
    ident = IntMatrix.identity(2)
    if a in (ident, -ident):
        raise HypothesisError("A = +-I lies outside this case; the group is a lattice semidirect product")
    n0 = tuple(int(v) for v in n0)
    order = finite_order(a)
    if order == 2:
        return _result(SpectrumDescriptor.r_infinity(), ["ext:order-two-action"])
    if order is not None:
        raise HypothesisError("finite order > 2 cannot occur for the double extension action")
    profile = eigenvalue_profile(a)
    if profile.kind in (KIND_REPEATED_ONE, KIND_REPEATED_MINUS_ONE):
        return _result(SpectrumDescriptor.r_infinity(), ["ext:repeated-eigenvalue"])
    if a.det() == -1:
        return _result(SpectrumDescriptor.r_infinity(), ["ext:hyperbolic-det-minus-one"])

    # hyperbolic, det 1: search for a block M whose lifting constraint
    # (I + A M) n0 in im(2A) + im(I - A) has an integral solution
    gens = (a + a).hstack(ident - a)
    seen: set[IntMatrix] = set()
    count = 0
    for wit in _system2_solutions(a, bound):
        count += 1
        if count > WITNESS_ENUM_LIMIT:
            break
        for m in _orbit_of(wit.matrix, a):
            if m in seen:
                continue
            seen.add(m)
            target = (ident + a * m).apply(n0)
            coeffs = lattice_membership(target, gens)
            if coeffs is not None:
                return _result(
                    SpectrumDescriptor.finite([8]),
                    ["ext:hyperbolic", "ext:lifting-witness"],
                    {
                        "witness": _to_witness(m).to_json_dict(),
                        "m0": list(coeffs[:2]),
                        "z0": list(coeffs[2:]),
                    },
                )

    # residue obstruction: the lifting constraint only depends on M mod 2,
    # and the system constrains (m, n, p) mod 8
    cols_mod2 = [tuple(v % 2 for v in (ident - a).column(j)) for j in range(2)]
    span2 = set()
    for c1 in range(2):
        for c2 in range(2):
            vec = tuple((c1 * cols_mod2[0][i] + c2 * cols_mod2[1][i]) % 2 for i in range(2))
            span2.add(vec)
    all_fail = True
    for m_res, n_res, p_res in _feasible_residues(a, 8):
        m = IntMatrix.from_rows([[m_res, n_res], [p_res, -m_res]])
        target = (ident + a * m).apply(n0)
        if tuple(v % 2 for v in target) in span2:
            all_fail = False
            break
    if all_fail:
        return _result(
            SpectrumDescriptor.r_infinity(),
            ["ext:hyperbolic", "ext:parity-obstruction"],
            {"obstruction_modulus": 8},
        )
    return _result(_undecided_or_eight(bound), ["ext:hyperbolic", "ext:search-exhausted"])


# ---------------------------------------------------------------------------
# dimension 4: H_n x|_psi Z


def classify_hn_semidirect(
    n: int,
    action: IntMatrix | tuple[int, int],
    bound: int,
    central_twists: tuple[int, int] = (0, 0),
) -> SpectrumResult:
    """Spectrum of H_n x|_psi Z.

    ``action`` is either the pair (k, l) of central twists for the
    inverting action psi(x) = x^-1 z^k, psi(y) = y^-1 z^l, or the 2x2
    matrix induced on H_n / Z(H_n) (with optional central twists).
    """
    if n < 1:
        raise HypothesisError("the Heisenberg parameter must be >= 1")
    ident = IntMatrix.identity(2)
    if not isinstance(action, IntMatrix):
        k, l = (int(v) for v in action)
        return _classify_hn_twists(n, k, l)
    a = action
    if a.rows != 2 or not a.is_unimodular:
        raise HypothesisError("the induced action must be a unimodular 2x2 matrix")
    if a == -ident:
        return _classify_hn_twists(n, int(central_twists[0]), int(central_twists[1]))
    profile = eigenvalue_profile(a)
    if profile.kind == KIND_REPEATED_ONE:
        if a == ident:
            return _result(
                SpectrumDescriptor.multiples(4),
                ["hn:unipotent-action", "nilpotent:heisenberg-times-z"],
            )
        return _result(
            SpectrumDescriptor.r_infinity(), ["hn:unipotent-action", "nilpotent:three-step"]
        )
    if profile.kind == KIND_ONE_MINUS_ONE:
        return _classify_hn_mixed(n, a, central_twists, bound)
    return _result(SpectrumDescriptor.r_infinity(), ["hn:no-eigenvalue-one"])


def _classify_hn_twists(n: int, k: int, l: int) -> SpectrumResult:
    if n % 2 == 1 or (k % 2 == 0 and l % 2 == 0):
        return _result(SpectrumDescriptor.multiples(4), ["hn:inverting-action", "hn:lifting-unconstrained"])
    return _result(SpectrumDescriptor.multiples(8), ["hn:inverting-action", "hn:lifting-parity"])


def _classify_hn_mixed(
    n: int, a: IntMatrix, central_twists: tuple[int, int], bound: int
) -> SpectrumResult:
    """Eigenvalues {1, -1}: realize the group as an extension of Z^2 by
    Z^2 and route through the canonicalized presentation."""
    heis = Heisenberg(n)
    cx, cy = (int(v) for v in central_twists)
    det_a = a.det()  # -1 in this branch
    psi = AutomorphismSpec.from_images(
        heis,
        {
            "x": (a[0, 0], a[1, 0], cx),
            "y": (a[0, 1], a[1, 1], cy),
            "z": (0, 0, det_a),
        },
    )
    report = verify_automorphism(psi)
    if not report:
        raise HypothesisError("the action data does not define an automorphism: %s" % report.failure)

    v_bar = eigenlattice(a, -1).basis[0]
    g, s, t = _xgcd(v_bar[0], v_bar[1])
    if g != 1:
        raise AssertionError("eigenlattice basis is not primitive")
    # complete v_bar to a basis with det [[v1, w1], [v2, w2]] = 1
    w_bar = (-t, s)

    v = heis.element((v_bar[0], v_bar[1], 0))
    w = heis.element((w_bar[0], w_bar[1], 0))
    z = heis.generator("z")

    def coords(g_elt) -> tuple[int, int]:
        ge = g_elt.exponents
        # kernel coordinates relative to the basis (v, z)
        if v_bar[0]:
            i = ge[0] // v_bar[0]
        else:
            i = ge[1] // v_bar[1]
        if (i * v_bar[0], i * v_bar[1]) != (ge[0], ge[1]):
            raise AssertionError("element does not lie in the rank-2 kernel")
        rest = g_elt * (v ** i).inverse()
        return (i, rest.exponents[2])

    a_ext = IntMatrix.from_columns([coords(w * v * w.inverse()), coords(w * z * w.inverse())])
    b_ext = IntMatrix.from_columns([coords(psi.apply(v)), coords(psi.apply(z))])
    n0_ext = coords(w * psi.apply(w).inverse())

    pres = ExtensionPresentation(a_ext, b_ext, n0_ext)
    canon = canonicalize_z2_by_z2(pres)
    trace = ["hn:mixed-eigenvalues", "ext:canonicalized"]
    ident = IntMatrix.identity(2)
    if canon.action_y == ident:
        m3 = IntMatrix.from_rows(
            [
                [canon.action_x[0, 0], canon.action_x[0, 1], canon.n0[0]],
                [canon.action_x[1, 0], canon.action_x[1, 1], canon.n0[1]],
                [0, 0, 1],
            ]
        )
        routed = classify_z3_semidirect(m3, bound)
        return _result(routed.spectrum, trace + ["ext:trivial-inner-action"] + list(routed.trace), routed.evidence)
    routed = classify_z2_minusI_ext(canon.action_x, canon.n0, bound)
    return _result(routed.spectrum, trace + list(routed.trace), routed.evidence)


# ---------------------------------------------------------------------------
# nilpotent families


THREE_STEP = "three-step"


def classify_nilpotent(family) -> SpectrumResult:
    """Spectrum of a nilpotent family: lattices, Heisenberg groups, their
    product with a line, and the three-step marker."""
    from .groups import FreeAbelian, Heisenberg as HeisFamily, HeisenbergTimesZ

    if family == THREE_STEP:
        return _result(SpectrumDescriptor.r_infinity(), ["nilpotent:three-step"])
    if isinstance(family, FreeAbelian):
        if family.n == 1:
            return _result(SpectrumDescriptor.finite([2]), ["nilpotent:rank-one"])
        return _result(SpectrumDescriptor.full(), ["nilpotent:lattice"])
    if isinstance(family, HeisFamily):
        return _result(SpectrumDescriptor.multiples(2), ["nilpotent:heisenberg"])
    if isinstance(family, HeisenbergTimesZ):
        return _result(SpectrumDescriptor.multiples(4), ["nilpotent:heisenberg-times-z"])
    raise HypothesisError("not a nilpotent family: %r" % (family,))


# ---------------------------------------------------------------------------
# Conclusion tables


def conclusion_tables() -> dict:
    """The classification tables for the four semidirect families, keyed
    by eigenvalue case."""
    inf = SpectrumDescriptor.r_infinity()

    def mult(c):
        return SpectrumDescriptor.multiples(c)

    def fin(vals):
        return SpectrumDescriptor.finite(vals)

    return {
        "z2-semidirect": [
            {"case": "repeated eigenvalue -1, A = -I", "spectrum": [mult(2)]},
            {"case": "repeated eigenvalue -1, A != -I", "spectrum": [inf]},
            {"case": "eigenvalues 1 and -1", "spectrum": [inf]},
            {"case": "real eigenvalues != +-1, det A = 1", "spectrum": [inf, fin([4])]},
            {"case": "real eigenvalues != +-1, det A = -1", "spectrum": [inf]},
            {"case": "non-real eigenvalues", "spectrum": [inf]},
        ],
        "z3-semidirect": [
            {"case": "1 not an eigenvalue, A = -I", "spectrum": [mult(2)]},
            {"case": "1 not an eigenvalue, A != -I", "spectrum": [inf]},
            {"case": "eigenvalues 1, 1, -1 (repeated 1)", "spectrum": [inf]},
            {"case": "simple 1, unipotent -1 block (n != 0)", "spectrum": [inf]},
            {"case": "simple 1, order-2 block, delta = 0", "spectrum": [mult(2)]},
            {"case": "simple 1, order-2 block, delta = 1", "spectrum": [mult(4)]},
            {"case": "simple 1, hyperbolic block, det = 1", "spectrum": [inf, fin([8])]},
            {"case": "simple 1, hyperbolic block, det = -1", "spectrum": [inf]},
            {"case": "simple 1, block of order 4 or 6", "spectrum": [inf]},
            {"case": "simple 1, block of order 3", "spectrum": [mult(6)]},
        ],
        "double-extension": [
            {"case": "repeated eigenvalue 1 or -1", "spectrum": [inf]},
            {"case": "real eigenvalues, det A = -1", "spectrum": [inf]},
            {"case": "real eigenvalues != +-1, det A = 1", "spectrum": [inf, fin([8])]},
        ],
        "heisenberg-semidirect": [
            {"case": "A != -I and 1 not an eigenvalue", "spectrum": [inf]},
            {"case": "inverting action, k and l even or n odd", "spectrum": [mult(4)]},
            {"case": "inverting action, k or l odd and n even", "spectrum": [mult(8)]},
        ],
    }
