"""Concrete group arithmetic for the classified families.

Six families are supported, each with hand-derived collection rules (a
generic collector would be slower and harder to audit at this size).
Elements are exponent vectors in a fixed generator order; the normal
form is unique, so two elements are equal exactly when their exponent
vectors agree.

Generator and exponent-slot order per family (also the order used by
all serialization):

===========================  =====================================
family                       slots
===========================  =====================================
FreeAbelian(n)               e1 .. en
Heisenberg(n)                x, y, z          (z central, yx = xy z^n)
HeisenbergTimesZ(n)          x, y, z, u       (u central)
ZnSemidirectZ(A)             e1 .. en, t      (t v t^-1 = A v)
Z2MinusIExt(A, n0)           e1, e2, t, u     (t v t^-1 = -v,
                                               u v u^-1 = A v,
                                               u t u^-1 = n0 t)
HnSemidirectZ(n, k, l)       x, y, z, t       (t x t^-1 = x^-1 z^k,
                                               t y t^-1 = y^-1 z^l,
                                               t z t^-1 = z)
===========================  =====================================

Exponents are arbitrary-precision; witness parameters up to 10**6 are
routine and must not overflow anything.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from itertools import product
import math
from typing import Iterable, Mapping, Sequence

from .exactlin import (
    IntMatrix,
    coset_representatives,
    finite_order,
    lattice_membership,
    matrix_power_sum,
)
from .twisted import HolonomySet, INFINITE, RNumber, r_abelian, r_averaging


class FamilyMismatchError(ValueError):
    """Elements of different families were combined."""


class UnknownWitnessError(ValueError):
    """No witness with the requested id exists for the family."""


@lru_cache(maxsize=None)
def _mpow(a: IntMatrix, k: int) -> IntMatrix:
    return a ** k


@lru_cache(maxsize=None)
def _msum(a: IntMatrix, k: int) -> IntMatrix:
    return matrix_power_sum(a, k)


# ---------------------------------------------------------------------------
# Families


class GroupFamily:
    """Base class; subclasses provide collection rules and relations."""

    generator_names: tuple[str, ...] = ()

    @property
    def slots(self) -> int:
        return len(self.generator_names)

    def element(self, exponents: Sequence[int]) -> "GroupElement":
        exponents = tuple(int(e) for e in exponents)
        if len(exponents) != self.slots:
            raise ValueError("expected %d exponents, got %d" % (self.slots, len(exponents)))
        return GroupElement(self, exponents)

    @property
    def identity(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.slots)

    def generator(self, name: str) -> "GroupElement":
        idx = self.generator_names.index(name)
        exps = [0] * self.slots
        exps[idx] = 1
        return GroupElement(self, tuple(exps))

    def generators(self) -> list["GroupElement"]:
        return [self.generator(name) for name in self.generator_names]

    # subclasses implement multiply/inverse on raw exponent tuples
    def multiply(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        raise NotImplementedError

    def inverse(self, a: tuple[int, ...]) -> tuple[int, ...]:
        raise NotImplementedError

    def relations(self) -> list[tuple[str, tuple, tuple]]:
        """Defining relations as (name, lhs word, rhs word) with words
        given as tuples of (generator index, exponent)."""
        raise NotImplementedError

    def tag(self) -> str:
        raise NotImplementedError

    def to_json_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class FreeAbelian(GroupFamily):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("rank must be >= 1")
        object.__setattr__(self, "generator_names", tuple("e%d" % (i + 1) for i in range(self.n)))

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(-x for x in a)

    def relations(self):
        return []  # the target is abelian, commutators vanish automatically

    def tag(self):
        return "free-abelian"

    def to_json_dict(self):
        return {"tag": self.tag(), "n": self.n}


def _heis_mul(n: int, a: tuple, b: tuple) -> tuple:
    # yx = xy z^n, z central: moving x^a2 left past y^b1 costs z^(n a2 b1)
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + n * b[0] * a[1])


def _heis_inv(n: int, a: tuple) -> tuple:
    return (-a[0], -a[1], -a[2] + n * a[0] * a[1])


@dataclass(frozen=True)
class Heisenberg(GroupFamily):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("Heisenberg parameter must be >= 1")
        object.__setattr__(self, "generator_names", ("x", "y", "z"))

    def multiply(self, a, b):
        return _heis_mul(self.n, a, b)

    def inverse(self, a):
        return _heis_inv(self.n, a)

    def relations(self):
        X, Y, Z = 0, 1, 2
        return [
            ("[z,x] = 1", ((Z, 1), (X, 1), (Z, -1), (X, -1)), ()),
            ("[z,y] = 1", ((Z, 1), (Y, 1), (Z, -1), (Y, -1)), ()),
            ("[y,x] = z^n", ((Y, 1), (X, 1), (Y, -1), (X, -1)), ((Z, self.n),)),
        ]

    def tag(self):
        return "heisenberg"

    def to_json_dict(self):
        return {"tag": self.tag(), "n": self.n}


@dataclass(frozen=True)
class HeisenbergTimesZ(GroupFamily):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("Heisenberg parameter must be >= 1")
        object.__setattr__(self, "generator_names", ("x", "y", "z", "u"))

    def multiply(self, a, b):
        return _heis_mul(self.n, a[:3], b[:3]) + (a[3] + b[3],)

    def inverse(self, a):
        return _heis_inv(self.n, a[:3]) + (-a[3],)

    def relations(self):
        X, Y, Z, U = 0, 1, 2, 3
        rels = [
            ("[z,x] = 1", ((Z, 1), (X, 1), (Z, -1), (X, -1)), ()),
            ("[z,y] = 1", ((Z, 1), (Y, 1), (Z, -1), (Y, -1)), ()),
            ("[y,x] = z^n", ((Y, 1), (X, 1), (Y, -1), (X, -1)), ((Z, self.n),)),
        ]
        for name, g in (("[u,x] = 1", X), ("[u,y] = 1", Y), ("[u,z] = 1", Z)):
            rels.append((name, ((U, 1), (g, 1), (U, -1), (g, -1)), ()))
        return rels

    def tag(self):
        return "heisenberg-times-z"

    def to_json_dict(self):
        return {"tag": self.tag(), "n": self.n}


@dataclass(frozen=True)
class ZnSemidirectZ(GroupFamily):
    action: IntMatrix

    def __post_init__(self):
        if not self.action.is_unimodular:
            raise ValueError("the acting matrix must be unimodular")
        n = self.action.rows
        object.__setattr__(self, "generator_names", tuple("e%d" % (i + 1) for i in range(n)) + ("t",))

    @property
    def n(self) -> int:
        return self.action.rows

    def multiply(self, a, b):
        n = self.n
        z1, k1 = a[:n], a[n]
        z2, k2 = b[:n], b[n]
        moved = _mpow(self.action, k1).apply(z2)
        return tuple(x + y for x, y in zip(z1, moved)) + (k1 + k2,)

    def inverse(self, a):
        n = self.n
        z, k = a[:n], a[n]
        moved = _mpow(self.action, -k).apply(z)
        return tuple(-x for x in moved) + (-k,)

    def relations(self):
        n = self.n
        T = n
        rels = []
        for i in range(n):
            for j in range(i + 1, n):
                rels.append(
                    ("[e%d,e%d] = 1" % (i + 1, j + 1), ((i, 1), (j, 1), (i, -1), (j, -1)), ())
                )
        for i in range(n):
            col = self.action.column(i)
            rhs = tuple((j, col[j]) for j in range(n) if col[j])
            rels.append(("t e%d t^-1 = action" % (i + 1), ((T, 1), (i, 1), (T, -1)), rhs))
        return rels

    def tag(self):
        return "zn-semidirect-z"

    def to_json_dict(self):
        return {"tag": self.tag(), "matrix": self.action.to_rows()}


@dataclass(frozen=True)
class Z2MinusIExt(GroupFamily):
    """(Z^2 x|_{-I} Z) x|_psi Z with psi(v t^k) = A(v) (n0 t)^k."""

    action: IntMatrix
    n0: tuple[int, int]

    def __post_init__(self):
        if self.action.rows != 2 or self.action.cols != 2 or not self.action.is_unimodular:
            raise ValueError("the outer action must be a unimodular 2x2 matrix")
        if len(self.n0) != 2:
            raise ValueError("n0 must be a length-2 integer vector")
        object.__setattr__(self, "n0", tuple(int(v) for v in self.n0))
        object.__setattr__(self, "generator_names", ("e1", "e2", "t", "u"))

    def multiply(self, a, b):
        A = self.action
        z1, k1, l1 = a[:2], a[2], a[3]
        z2, k2, l2 = b[:2], b[2], b[3]
        w = _mpow(A, l1).apply(z2)
        if k2 % 2:
            shift = _msum(A, l1).apply(self.n0)
            w = (w[0] + shift[0], w[1] + shift[1])
        sign = -1 if k1 % 2 else 1
        return (z1[0] + sign * w[0], z1[1] + sign * w[1], k1 + k2, l1 + l2)

    def inverse(self, a):
        A = self.action
        z, k, l = a[:2], a[2], a[3]
        sign = -1 if k % 2 else 1
        w = [-sign * z[0], -sign * z[1]]
        if k % 2:
            shift = _msum(A, l).apply(self.n0)
            w[0] -= shift[0]
            w[1] -= shift[1]
        back = _mpow(A, -l).apply(w)
        return (back[0], back[1], -k, -l)

    def relations(self):
        E1, E2, T, U = 0, 1, 2, 3
        a = self.action
        rels = [
            ("[e1,e2] = 1", ((E1, 1), (E2, 1), (E1, -1), (E2, -1)), ()),
            ("t e1 t^-1 = e1^-1", ((T, 1), (E1, 1), (T, -1)), ((E1, -1),)),
            ("t e2 t^-1 = e2^-1", ((T, 1), (E2, 1), (T, -1)), ((E2, -1),)),
        ]
        for i, gen in enumerate((E1, E2)):
            col = a.column(i)
            rhs = tuple((j, col[j]) for j in range(2) if col[j])
            rels.append(("u e%d u^-1 = action" % (i + 1), ((U, 1), (gen, 1), (U, -1)), rhs))
        rhs_t = tuple((j, self.n0[j]) for j in range(2) if self.n0[j]) + ((T, 1),)
        rels.append(("u t u^-1 = n0 t", ((U, 1), (T, 1), (U, -1)), rhs_t))
        return rels

    def tag(self):
        return "z2-minusi-ext"

    def to_json_dict(self):
        return {"tag": self.tag(), "matrix": self.action.to_rows(), "n0": list(self.n0)}


@dataclass(frozen=True)
class HnSemidirectZ(GroupFamily):
    """H_n x|_psi Z with psi(x) = x^-1 z^k, psi(y) = y^-1 z^l, psi(z) = z."""

    n: int
    k: int
    l: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("Heisenberg parameter must be >= 1")
        object.__setattr__(self, "generator_names", ("x", "y", "z", "t"))

    def _psi(self, h: tuple) -> tuple:
        a, b, c = h
        return (-a, -b, c + self.k * a + self.l * b)

    def multiply(self, a, b):
        h2 = b[:3]
        if a[3] % 2:  # psi is an involution on H_n
            h2 = self._psi(h2)
        return _heis_mul(self.n, a[:3], h2) + (a[3] + b[3],)

    def inverse(self, a):
        h = _heis_inv(self.n, a[:3])
        if a[3] % 2:
            h = self._psi(h)
        return h + (-a[3],)

    def relations(self):
        X, Y, Z, T = 0, 1, 2, 3
        return [
            ("[z,x] = 1", ((Z, 1), (X, 1), (Z, -1), (X, -1)), ()),
            ("[z,y] = 1", ((Z, 1), (Y, 1), (Z, -1), (Y, -1)), ()),
            ("[y,x] = z^n", ((Y, 1), (X, 1), (Y, -1), (X, -1)), ((Z, self.n),)),
            ("t x t^-1 = x^-1 z^k", ((T, 1), (X, 1), (T, -1)), ((X, -1), (Z, self.k))),
            ("t y t^-1 = y^-1 z^l", ((T, 1), (Y, 1), (T, -1)), ((Y, -1), (Z, self.l))),
            ("t z t^-1 = z", ((T, 1), (Z, 1), (T, -1)), ((Z, 1),)),
        ]

    def tag(self):
        return "hn-semidirect-z"

    def to_json_dict(self):
        return {"tag": self.tag(), "n": self.n, "k": self.k, "l": self.l}


FAMILY_TAGS = {
    "free-abelian": FreeAbelian,
    "heisenberg": Heisenberg,
    "heisenberg-times-z": HeisenbergTimesZ,
    "zn-semidirect-z": ZnSemidirectZ,
    "z2-minusi-ext": Z2MinusIExt,
    "hn-semidirect-z": HnSemidirectZ,
}


def family_from_json(data: Mapping) -> GroupFamily:
    tag = data.get("tag")
    if tag == "free-abelian":
        return FreeAbelian(int(data["n"]))
    if tag == "heisenberg":
        return Heisenberg(int(data["n"]))
    if tag == "heisenberg-times-z":
        return HeisenbergTimesZ(int(data["n"]))
    if tag == "zn-semidirect-z":
        return ZnSemidirectZ(IntMatrix.from_rows(data["matrix"]))
    if tag == "z2-minusi-ext":
        return Z2MinusIExt(IntMatrix.from_rows(data["matrix"]), tuple(data["n0"]))
    if tag == "hn-semidirect-z":
        return HnSemidirectZ(int(data["n"]), int(data["k"]), int(data["l"]))
    raise ValueError("unknown family tag %r" % tag)


# ---------------------------------------------------------------------------
# Elements


@dataclass(frozen=True)
class GroupElement:
    family: GroupFamily
    exponents: tuple[int, ...]

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if self.family != other.family:
            raise FamilyMismatchError("cannot multiply elements of different families")
        return GroupElement(self.family, self.family.multiply(self.exponents, other.exponents))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.family, self.family.inverse(self.exponents))

    def __pow__(self, k: int) -> "GroupElement":
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        result = self.family.identity
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    @property
    def is_identity(self) -> bool:
        return all(e == 0 for e in self.exponents)

    def __repr__(self) -> str:
        parts = [
            "%s^%d" % (name, e)
            for name, e in zip(self.family.generator_names, self.exponents)
            if e
        ]
        return "<%s>" % (" ".join(parts) if parts else "1")


# ---------------------------------------------------------------------------
# Automorphism specifications


@dataclass(frozen=True)
class AutomorphismSpec:
    """Generator images in normal form; derived matrices are always
    recomputed from the images, never stored."""

    family: GroupFamily
    images: tuple[GroupElement, ...]
    verified: bool = False

    def __post_init__(self):
        if len(self.images) != self.family.slots:
            raise ValueError(
                "expected %d generator images, got %d" % (self.family.slots, len(self.images))
            )
        for img in self.images:
            if img.family != self.family:
                raise FamilyMismatchError("image lies in a different family")

    @classmethod
    def from_images(cls, family: GroupFamily, images: Mapping[str, Sequence[int]]) -> "AutomorphismSpec":
        elems = []
        for name in family.generator_names:
            if name not in images:
                raise ValueError("missing image for generator %r" % name)
            elems.append(family.element(images[name]))
        return cls(family, tuple(elems))

    def image_of(self, name: str) -> GroupElement:
        return self.images[self.family.generator_names.index(name)]

    def apply(self, g: GroupElement) -> GroupElement:
        """phi(g) for g in normal form: the product of generator images
        raised to g's exponents, in slot order."""
        if g.family != self.family:
            raise FamilyMismatchError("element belongs to a different family")
        result = self.family.identity
        for img, e in zip(self.images, g.exponents):
            if e:
                result = result * img ** e
        return result

    def to_json_dict(self) -> dict:
        return {
            "family": self.family.to_json_dict(),
            "images": {
                name: list(img.exponents)
                for name, img in zip(self.family.generator_names, self.images)
            },
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "AutomorphismSpec":
        return cls.from_images(family_from_json(data["family"]), data["images"])

    # -- derived matrices --------------------------------------------------

    @property
    def fitting_matrix(self) -> IntMatrix:
        """Action on the canonical abelian normal layer of the family."""
        fam = self.family
        if isinstance(fam, FreeAbelian):
            return IntMatrix.from_columns([img.exponents for img in self.images])
        if isinstance(fam, (Heisenberg, HnSemidirectZ)):
            return IntMatrix.from_columns(
                [self.image_of("x").exponents[:2], self.image_of("y").exponents[:2]]
            )
        if isinstance(fam, HeisenbergTimesZ):
            z_img, u_img = self.image_of("z"), self.image_of("u")
            if any(z_img.exponents[:2]) or any(u_img.exponents[:2]):
                raise ValueError("images do not preserve the center")
            return IntMatrix.from_columns([z_img.exponents[2:], u_img.exponents[2:]])
        if isinstance(fam, ZnSemidirectZ):
            n = fam.n
            cols = []
            for i in range(n):
                img = self.images[i]
                if img.exponents[n] != 0:
                    raise ValueError("images do not preserve the lattice subgroup")
                cols.append(img.exponents[:n])
            return IntMatrix.from_columns(cols)
        if isinstance(fam, Z2MinusIExt):
            cols = []
            for i in range(2):
                img = self.images[i]
                if img.exponents[2] or img.exponents[3]:
                    raise ValueError("images do not preserve the lattice subgroup")
                cols.append(img.exponents[:2])
            return IntMatrix.from_columns(cols)
        raise TypeError("unknown family")

    @property
    def quotient_matrix(self) -> IntMatrix:
        """Action on the abelianized top layer of the family."""
        fam = self.family
        if isinstance(fam, FreeAbelian):
            return self.fitting_matrix
        if isinstance(fam, (Heisenberg, HeisenbergTimesZ)):
            return IntMatrix.from_columns(
                [self.image_of("x").exponents[:2], self.image_of("y").exponents[:2]]
            )
        if isinstance(fam, ZnSemidirectZ):
            return IntMatrix(1, 1, (self.image_of("t").exponents[fam.n],))
        if isinstance(fam, Z2MinusIExt):
            return IntMatrix.from_columns(
                [self.image_of("t").exponents[2:], self.image_of("u").exponents[2:]]
            )
        if isinstance(fam, HnSemidirectZ):
            return IntMatrix(1, 1, (self.image_of("t").exponents[3],))
        raise TypeError("unknown family")


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    failure: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def _eval_word(spec: AutomorphismSpec, word: Iterable[tuple[int, int]]) -> GroupElement:
    result = spec.family.identity
    for idx, exp in word:
        result = result * spec.images[idx] ** exp
    return result


def verify_automorphism(spec: AutomorphismSpec) -> VerificationResult:
    """Check that the generator images define an automorphism.

    A spec passes when every defining relation maps to a valid identity
    and the induced matrices on the layers of the polycyclic series are
    unimodular; the report names the first violated relation.
    """
    for name, lhs, rhs in spec.family.relations():
        if _eval_word(spec, lhs) != _eval_word(spec, rhs):
            return VerificationResult(False, "relation violated: %s" % name)
    failure = _layer_failure(spec)
    if failure:
        return VerificationResult(False, failure)
    return VerificationResult(True)


def _layer_failure(spec: AutomorphismSpec) -> str | None:
    fam = spec.family
    try:
        if isinstance(fam, FreeAbelian):
            if not spec.fitting_matrix.is_unimodular:
                return "lattice matrix is not unimodular"
            return None
        if isinstance(fam, Heisenberg):
            z_img = spec.image_of("z")
            if any(z_img.exponents[:2]) or abs(z_img.exponents[2]) != 1:
                return "center image is not z^(+-1)"
            if not spec.quotient_matrix.is_unimodular:
                return "quotient matrix is not unimodular"
            return None
        if isinstance(fam, HeisenbergTimesZ):
            if not spec.fitting_matrix.is_unimodular:
                return "center matrix is not unimodular"
            if not spec.quotient_matrix.is_unimodular:
                return "quotient matrix is not unimodular"
            return None
        if isinstance(fam, ZnSemidirectZ):
            return _zn_layer_failure(spec)
        if isinstance(fam, Z2MinusIExt):
            if not spec.fitting_matrix.is_unimodular:
                return "lattice matrix is not unimodular"
            if not spec.quotient_matrix.is_unimodular:
                return "quotient matrix is not unimodular"
            return None
        if isinstance(fam, HnSemidirectZ):
            z_img = spec.image_of("z")
            if any(z_img.exponents[:2]) or z_img.exponents[3] or abs(z_img.exponents[2]) != 1:
                return "center image is not z^(+-1)"
            for name in ("x", "y"):
                if spec.image_of(name).exponents[3]:
                    return "image of %s leaves the Heisenberg subgroup" % name
            if not spec.fitting_matrix.is_unimodular:
                return "Heisenberg quotient matrix is not unimodular"
            if abs(spec.image_of("t").exponents[3]) != 1:
                return "quotient exponent of t is not +-1"
            return None
    except ValueError as exc:
        return str(exc)
    return "unknown family"


def _zn_layer_failure(spec: AutomorphismSpec) -> str | None:
    fam = spec.family
    n = fam.n
    a = fam.action
    ident = IntMatrix.identity(n)
    if a == ident:
        full = IntMatrix.from_columns([img.exponents for img in spec.images])
        return None if full.is_unimodular else "full abelian matrix is not unimodular"
    lattice_preserved = all(spec.images[i].exponents[n] == 0 for i in range(n))
    if lattice_preserved:
        if not spec.fitting_matrix.is_unimodular:
            return "lattice matrix is not unimodular"
        if abs(spec.image_of("t").exponents[n]) != 1:
            return "quotient exponent of t is not +-1"
        return None
    d = finite_order(a)
    if d is None:
        # With an infinite-order action the lattice is characteristic
        # whenever 1 is not an eigenvalue, so leaving it is a failure; in
        # the unipotent corner this check is sound but conservative.
        return "images leave the lattice subgroup"
    try:
        mt = translation_matrix(spec, d)
    except ValueError as exc:
        return str(exc)
    if not mt.is_unimodular:
        return "translation-lattice matrix is not unimodular"
    if math.gcd(spec.image_of("t").exponents[n], d) != 1:
        return "induced map on the finite quotient is not bijective"
    return None


def translation_matrix(spec: AutomorphismSpec, d: int) -> IntMatrix:
    """Matrix of the automorphism on the finite-index lattice <t^d, e1..en>.

    Coordinates are (t^d, e1, ..., en); requires every e_i image to have
    t-exponent divisible by d (the lattice is characteristic when the
    action has finite order d, so genuine automorphisms always restrict).
    """
    fam = spec.family
    if not isinstance(fam, ZnSemidirectZ):
        raise TypeError("translation matrix only applies to ZnSemidirectZ")
    n = fam.n
    cols = []
    t_power = spec.image_of("t") ** d
    for img in [t_power] + [spec.images[i] for i in range(n)]:
        texp = img.exponents[n]
        if texp % d:
            raise ValueError("image does not lie in the translation lattice")
        cols.append((texp // d,) + img.exponents[:n])
    return IntMatrix.from_columns(cols)


def holonomy_embedding(a: IntMatrix) -> IntMatrix:
    """diag(1, A): the holonomy generator in translation coordinates."""
    n = a.rows
    rows = [[1] + [0] * n]
    for i in range(n):
        rows.append([0] + list(a.row(i)))
    return IntMatrix.from_rows(rows)


# ---------------------------------------------------------------------------
# Reidemeister numbers of verified specs (formula path)


def _r_scalar(e: int) -> RNumber:
    return r_abelian(IntMatrix(1, 1, (e,)))


def rnumber_with_trace(spec: AutomorphismSpec) -> tuple[RNumber, tuple[str, ...]]:
    """Reidemeister number of a verified spec along the family's formula route."""
    if not spec.verified:
        raise ValueError("spec must be verified first")
    fam = spec.family
    if isinstance(fam, FreeAbelian):
        return r_abelian(spec.fitting_matrix), ("rnumber:lattice",)
    if isinstance(fam, Heisenberg):
        e = spec.image_of("z").exponents[2]
        r = _r_scalar(e) * r_abelian(spec.quotient_matrix)
        return r, ("rnumber:center-times-quotient",)
    if isinstance(fam, HeisenbergTimesZ):
        r = r_abelian(spec.fitting_matrix) * r_abelian(spec.quotient_matrix)
        return r, ("rnumber:center-times-quotient",)
    if isinstance(fam, ZnSemidirectZ):
        return _rnumber_zn(spec)
    if isinstance(fam, Z2MinusIExt):
        return _rnumber_double_ext(spec)
    if isinstance(fam, HnSemidirectZ):
        eps = spec.image_of("t").exponents[3]
        if eps == 1:
            return INFINITE, ("rnumber:identity-quotient",)
        m = spec.fitting_matrix
        e = spec.image_of("z").exponents[2]
        r = _r_scalar(e) * (r_abelian(m) + r_abelian(-m))
        return r, ("rnumber:two-step-addition",)
    raise TypeError("unknown family")


def _rnumber_zn(spec: AutomorphismSpec) -> tuple[RNumber, tuple[str, ...]]:
    fam = spec.family
    n = fam.n
    a = fam.action
    if a == IntMatrix.identity(n):
        full = IntMatrix.from_columns([img.exponents for img in spec.images])
        return r_abelian(full), ("rnumber:lattice",)
    lattice_preserved = all(spec.images[i].exponents[n] == 0 for i in range(n))
    if lattice_preserved:
        eps = spec.image_of("t").exponents[n]
        if eps == 1:
            return INFINITE, ("rnumber:identity-quotient",)
        m = spec.fitting_matrix
        return r_abelian(m) + r_abelian(a * m), ("rnumber:two-step-addition",)
    d = finite_order(a)
    if d is None:
        raise ValueError("images leave the lattice for an infinite-order action")
    mt = translation_matrix(spec, d)
    holonomy = HolonomySet.cyclic(holonomy_embedding(a))
    return r_averaging(holonomy, mt), ("rnumber:holonomy-averaging",)


def _rnumber_double_ext(spec: AutomorphismSpec) -> tuple[RNumber, tuple[str, ...]]:
    fam = spec.family
    a = fam.action
    m = spec.fitting_matrix
    k = spec.quotient_matrix
    shifted = IntMatrix.identity(2) - k
    reps = coset_representatives(shifted)
    if reps is None:
        return INFINITE, ("rnumber:identity-quotient",)
    minus = -IntMatrix.identity(2)
    total = None
    for e, f in reps:
        conj = _mpow(minus, e) * _mpow(a, f)
        term = r_abelian(conj * m)
        total = term if total is None else total + term
    return total, ("rnumber:quotient-class-sum",)


def rnumber(spec: AutomorphismSpec) -> RNumber:
    return rnumber_with_trace(spec)[0]


# ---------------------------------------------------------------------------
# Witness automorphism families


def witness(family: GroupFamily, name: str, param: int) -> AutomorphismSpec:
    """A verified witness automorphism with a known closed-form count."""
    if param < 1:
        raise ValueError("witness parameter must be >= 1")
    builder = _WITNESS_BUILDERS.get((type(family), name))
    if builder is None:
        raise UnknownWitnessError("no witness %r for family %r" % (name, family.tag()))
    spec = builder(family, param)
    report = verify_automorphism(spec)
    if not report:
        raise AssertionError("witness construction failed verification: %s" % report.failure)
    return replace(spec, verified=True)


def _witness_phi_m_htz(fam: HeisenbergTimesZ, m: int) -> AutomorphismSpec:
    return AutomorphismSpec.from_images(
        fam, {"x": (0, 1, 0, 0), "y": (1, m, 0, 0), "z": (0, 0, -1, 0), "u": (0, 0, 0, -1)}
    )


def _witness_phi_m_heis(fam: Heisenberg, m: int) -> AutomorphismSpec:
    return AutomorphismSpec.from_images(fam, {"x": (0, 1, 0), "y": (1, m, 0), "z": (0, 0, -1)})


def _witness_target_abelian(fam: FreeAbelian, alpha: int) -> AutomorphismSpec:
    if fam.n == 1:
        raise UnknownWitnessError("rank-1 lattices only admit the negation witness")
    # det(I - M) = -alpha for the leading 2x2 block, identity elsewhere
    images = {}
    images["e1"] = (0, 1) + (0,) * (fam.n - 2)
    images["e2"] = (-1, alpha + 2) + (0,) * (fam.n - 2)
    for i in range(2, fam.n):
        vec = [0] * fam.n
        vec[i] = 1
        images["e%d" % (i + 1)] = tuple(vec)
    return AutomorphismSpec.from_images(fam, images)


def _witness_negation(fam: FreeAbelian, param: int) -> AutomorphismSpec:
    images = {}
    for i in range(fam.n):
        vec = [0] * fam.n
        vec[i] = -1
        images["e%d" % (i + 1)] = tuple(vec)
    return AutomorphismSpec.from_images(fam, images)


def minus_i_block_matrix(n: int, m: int) -> IntMatrix:
    """The n x n witness block: top row (0..0 1), then [I_(n-1) | (0..0 m)^T]."""
    rows = [[0] * (n - 1) + [1]]
    for i in range(n - 1):
        row = [0] * n
        row[i] = 1
        if i == n - 2:
            row[n - 1] = m
        rows.append(row)
    return IntMatrix.from_rows(rows)


def _witness_m_m(fam: ZnSemidirectZ, m: int) -> AutomorphismSpec:
    n = fam.n
    if fam.action != -IntMatrix.identity(n):
        raise UnknownWitnessError("the block witness requires the -I action")
    block = minus_i_block_matrix(n, m)
    images = {}
    for i in range(n):
        images["e%d" % (i + 1)] = tuple(block.column(i)) + (0,)
    images["t"] = (0,) * n + (-1,)
    return AutomorphismSpec.from_images(fam, images)


def tahara_form_order2(delta: int) -> IntMatrix:
    return IntMatrix.from_rows([[1, 0, delta], [0, -1, 0], [0, 0, -1]])


def tahara_form_order3(delta: int) -> IntMatrix:
    return IntMatrix.from_rows([[1, 0, delta], [0, 0, -1], [0, 1, -1]])


def _witness_phi_alpha(fam: ZnSemidirectZ, alpha: int) -> AutomorphismSpec:
    a = fam.action
    if a == tahara_form_order2(1):
        images = {
            "e1": (1 - 2 * alpha, 0, 0, 4 * alpha),
            "e2": (-1, -1, 2, 0),
            "e3": (1 - alpha, 1, -1, 2 * alpha),
            "t": (0, 0, 1, -1),
        }
    elif a == tahara_form_order2(0):
        images = {
            "e1": (1 - 2 * alpha, 0, 0, 2),
            "e2": (0, 0, 1, 0),
            "e3": (0, 1, 1, 0),
            "t": (alpha, 0, 0, -1),
        }
    elif a in (tahara_form_order3(0), tahara_form_order3(1)):
        delta = 1 if a == tahara_form_order3(1) else 0
        images = {
            "e1": (3 * alpha - 1, 0, 0, 3 * (delta * 3 * alpha + (1 - delta))),
            "e2": (delta * alpha, -1, 0, 3 * delta * alpha),
            "e3": (delta * alpha, 0, -1, 3 * delta * alpha),
            "t": ((1 - delta) * alpha, 1, 0, 1),
        }
    else:
        raise UnknownWitnessError("phi_alpha requires one of the canonical finite-order forms")
    return AutomorphismSpec.from_images(fam, images)


def _witness_m_r(fam: HnSemidirectZ, r: int) -> AutomorphismSpec:
    n, k, l = fam.n, fam.k, fam.l
    even_n = n % 2 == 0
    if even_n and (k % 2 or l % 2):
        if r % 2:
            raise UnknownWitnessError("with an odd central twist and even n the trace must be even")
        if k % 2 == 0:  # l odd
            m = IntMatrix.from_rows([[r + 1, r // 2], [-2, -1]])
        elif l % 2 == 0:  # k odd
            m = IntMatrix.from_rows([[-1, -2], [r // 2, r + 1]])
        else:  # both odd
            m = IntMatrix.from_rows([[0, 1], [1, r]])
    else:
        m = IntMatrix.from_rows([[r, 1], [1, 0]])
    return _hn_spec_from_block(fam, m)


def _hn_spec_from_block(fam: HnSemidirectZ, m: IntMatrix) -> AutomorphismSpec:
    """Extend the quotient block M (det -1) to a full spec by solving the
    lifting condition for the central exponents."""
    n, k, l = fam.n, fam.k, fam.l
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    if m.det() != -1:
        raise ValueError("the quotient block must have determinant -1")
    t1 = (IntMatrix.identity(2) + m.transpose()).apply((k, l))
    if n % 2 == 1:
        inv2 = (n + 1) // 2
        mz = (-t1[0] * inv2) % n
        pz = (-t1[1] * inv2) % n
        mtilde = (2 * mz + t1[0]) // n
        ptilde = (2 * pz + t1[1]) // n
        corner = IntMatrix.from_rows([[-c, a], [-d, b]])
        ef = corner.inverse_unimodular().apply((mtilde - a * c, ptilde - b * d))
    else:
        if t1[0] % 2 or t1[1] % 2:
            raise ValueError("the block does not satisfy the lifting parity condition")
        mz = (n * a * c - t1[0]) // 2
        pz = (n * b * d - t1[1]) // 2
        ef = (0, 0)
    images = {
        "x": (a, c, mz, 0),
        "y": (b, d, pz, 0),
        "z": (0, 0, -1, 0),
        "t": (ef[0], ef[1], 0, -1),
    }
    return AutomorphismSpec.from_images(fam, images)


def _witness_phi_eight(fam: Z2MinusIExt, param: int) -> AutomorphismSpec:
    """An automorphism of the double extension with eight classes, when
    one exists: a trace-zero block solving the intertwining equation plus
    an integral solution of the lifting constraint."""
    a = fam.action
    aa, bb = a[0, 0], a[0, 1]
    cc, dd = a[1, 0], a[1, 1]
    gens = (a + a).hstack(IntMatrix.identity(2) - a)  # columns of [2A | I-A]
    bound = max(50, param)
    for m_val in _search_order(bound):
        kk = 1 + m_val * m_val
        for div in range(1, kk + 1):
            if kk % div:
                continue
            for n_val, p_val in ((div, -kk // div), (-div, kk // div)):
                if (aa - dd) * m_val + bb * p_val + cc * n_val:
                    continue
                m = IntMatrix.from_rows([[m_val, n_val], [p_val, -m_val]])
                target = (IntMatrix.identity(2) + a * m).apply(fam.n0)
                coeffs = lattice_membership(target, gens)
                if coeffs is None:
                    continue
                m0 = coeffs[:2]
                z0 = coeffs[2:]
                images = {
                    "e1": tuple(m.column(0)) + (0, 0),
                    "e2": tuple(m.column(1)) + (0, 0),
                    "t": (z0[0], z0[1], -1, 0),
                    "u": (m0[0], m0[1], 0, -1),
                }
                return AutomorphismSpec.from_images(fam, images)
    raise UnknownWitnessError("no eight-class automorphism found within the search bound")


def _search_order(bound: int):
    yield 0
    for m in range(1, bound + 1):
        yield -m
        yield m


_WITNESS_BUILDERS = {
    (HeisenbergTimesZ, "phi_m"): _witness_phi_m_htz,
    (Heisenberg, "phi_m"): _witness_phi_m_heis,
    (FreeAbelian, "target"): _witness_target_abelian,
    (FreeAbelian, "negation"): _witness_negation,
    (ZnSemidirectZ, "M_m"): _witness_m_m,
    (ZnSemidirectZ, "phi_alpha"): _witness_phi_alpha,
    (HnSemidirectZ, "M_r"): _witness_m_r,
    (Z2MinusIExt, "phi_eight"): _witness_phi_eight,
}


# ---------------------------------------------------------------------------
# Twisted-conjugacy labeling oracle


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}
        self.rank = {x: 0 for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        elif self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        self.parent[ry] = rx


@dataclass(frozen=True)
class ClassLabeling:
    """Twisted-conjugacy labels over a bounded exponent ball.

    ``complete`` is a heuristic fixed-point certificate: the class count
    did not change when the radius grew by one and every class already
    meets the interior of the ball.  It is never a proof; the formula
    paths stay authoritative and the oracle is a falsifier.
    """

    ball_radius: int
    labels: Mapping[tuple[int, ...], int]
    complete: bool

    @property
    def class_count(self) -> int:
        return len(set(self.labels.values()))


def label_classes(spec: AutomorphismSpec, radius: int) -> ClassLabeling:
    """Union-find saturation of g ~ z g phi(z)^-1 over an exponent ball.

    Labels over the radius-r ball are read off the saturation of the
    radius-(r+1) ball, so that merge paths grazing the boundary are not
    reported as spurious extra classes.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if not spec.verified:
        raise ValueError("spec must be verified first")
    fam = spec.family
    twists = []
    for gen in fam.generators():
        for z in (gen, gen.inverse()):
            twists.append((z.exponents, spec.apply(z).inverse().exponents))

    def saturate(r):
        ball = set(product(range(-r, r + 1), repeat=fam.slots))
        uf = _UnionFind(ball)
        mul = fam.multiply
        for g in ball:
            for z_exp, phiz_inv in twists:
                h = mul(mul(z_exp, g), phiz_inv)
                if h in ball:
                    uf.union(g, h)
        return uf

    uf = saturate(radius + 1)
    uf_next = saturate(radius + 2)

    ball = sorted(product(range(-radius, radius + 1), repeat=fam.slots))
    count = len({uf.find(g) for g in ball})
    roots_next: dict[tuple, list] = {}
    for g in product(range(-radius - 1, radius + 2), repeat=fam.slots):
        roots_next.setdefault(uf_next.find(g), []).append(g)
    count_next = len(roots_next)
    interior = radius - 1
    complete = count == count_next and all(
        any(max(abs(e) for e in member) <= interior for member in members)
        for members in roots_next.values()
    )

    labels: dict[tuple[int, ...], int] = {}
    assigned: dict[tuple, int] = {}
    for g in ball:
        root = uf.find(g)
        if root not in assigned:
            assigned[root] = len(assigned)
        labels[g] = assigned[root]
    return ClassLabeling(radius, labels, complete)
