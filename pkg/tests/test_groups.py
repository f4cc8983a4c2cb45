import json

import pytest

from reidemeister.exactlin import IntMatrix, parse_matrix
from reidemeister.groups import (
    AutomorphismSpec,
    FamilyMismatchError,
    FreeAbelian,
    Heisenberg,
    HeisenbergTimesZ,
    HnSemidirectZ,
    UnknownWitnessError,
    Z2MinusIExt,
    ZnSemidirectZ,
    family_from_json,
    label_classes,
    minus_i_block_matrix,
    rnumber,
    rnumber_with_trace,
    tahara_form_order2,
    tahara_form_order3,
    verify_automorphism,
    witness,
)
from reidemeister.twisted import RNumber
from dataclasses import replace

I2 = IntMatrix.identity(2)
FIB = parse_matrix("2,3;3,5")

ALL_FAMILIES = [
    FreeAbelian(2),
    FreeAbelian(3),
    Heisenberg(1),
    Heisenberg(3),
    HeisenbergTimesZ(2),
    ZnSemidirectZ(FIB),
    ZnSemidirectZ(tahara_form_order2(1)),
    Z2MinusIExt(FIB, (1, 0)),
    HnSemidirectZ(2, 1, 3),
]


def random_element(rng, fam, limit=6):
    return fam.element([rng.randint(-limit, limit) for _ in range(fam.slots)])


def test_heisenberg_collection_example():
    h = Heisenberg(4)
    x, y, z = h.generators()
    assert (y * x).exponents == (1, 1, 4)  # y x collects to x y z^n
    assert (x * y).exponents == (1, 1, 0)


def test_semidirect_action_example():
    fam = ZnSemidirectZ(FIB)
    e1 = fam.generator("e1")
    t = fam.generator("t")
    assert (t * e1 * t.inverse()).exponents == (2, 3, 0)  # first column of the action


def test_group_axioms_random(rng):
    for fam in ALL_FAMILIES:
        for _ in range(120):
            g = random_element(rng, fam)
            h = random_element(rng, fam)
            k = random_element(rng, fam)
            assert ((g * h) * k) == (g * (h * k))
            assert (g * g.inverse()).is_identity
            assert (g.inverse() * g).is_identity
            assert (g * fam.identity) == g


def test_powers_match_repeated_multiplication(rng):
    for fam in ALL_FAMILIES:
        g = random_element(rng, fam, 3)
        acc = fam.identity
        for k in range(7):
            assert g ** k == acc
            acc = acc * g
        assert g ** -3 == (g ** 3).inverse()


def test_family_mismatch():
    with pytest.raises(FamilyMismatchError):
        Heisenberg(1).generator("x") * Heisenberg(2).generator("x")


def test_verify_phi_m():
    spec = AutomorphismSpec.from_images(
        HeisenbergTimesZ(2),
        {"x": (0, 1, 0, 0), "y": (1, 4, 0, 0), "z": (0, 0, -1, 0), "u": (0, 0, 0, -1)},
    )
    assert verify_automorphism(spec).ok


def test_verify_rejects_center_doubling():
    spec = AutomorphismSpec.from_images(
        Heisenberg(3), {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 2)}
    )
    report = verify_automorphism(spec)
    assert not report.ok
    assert "[y,x]" in report.failure or "z^" in report.failure


def test_verify_rejects_non_unimodular_layer():
    spec = AutomorphismSpec.from_images(
        FreeAbelian(2), {"e1": (2, 0), "e2": (0, 1)}
    )
    report = verify_automorphism(spec)
    assert not report.ok and "unimodular" in report.failure


def test_verify_phi_alpha_order2():
    fam = ZnSemidirectZ(tahara_form_order2(1))
    spec = AutomorphismSpec.from_images(
        fam, {"e1": (-1, 0, 0, 4), "e2": (-1, -1, 2, 0), "e3": (0, 1, -1, 2), "t": (0, 0, 1, -1)}
    )
    assert verify_automorphism(spec).ok


def test_verify_reports_broken_semidirect_relation():
    fam = ZnSemidirectZ(FIB)
    spec = AutomorphismSpec.from_images(
        fam, {"e1": (1, 0, 0), "e2": (0, 1, 0), "t": (0, 0, -1)}
    )
    report = verify_automorphism(spec)
    assert not report.ok and "t e" in report.failure


def test_apply_is_a_homomorphism(rng):
    for fam in ALL_FAMILIES[:6]:
        name = {"free-abelian": None}.get(fam.tag())
        spec = None
        if isinstance(fam, Heisenberg):
            spec = witness(fam, "phi_m", 2)
        elif isinstance(fam, HeisenbergTimesZ):
            spec = witness(fam, "phi_m", 3)
        if spec is None:
            continue
        for _ in range(60):
            g = random_element(rng, fam, 4)
            h = random_element(rng, fam, 4)
            assert spec.apply(g * h) == spec.apply(g) * spec.apply(h)


def test_witness_contract_closed_forms():
    for n in (1, 2):
        fam = HeisenbergTimesZ(n)
        for m in (1, 4, 20):
            assert rnumber(witness(fam, "phi_m", m)) == RNumber.finite(4 * m)
    fam = Heisenberg(3)
    for m in (1, 7):
        assert rnumber(witness(fam, "phi_m", m)) == RNumber.finite(2 * m)
    fam = ZnSemidirectZ(-I2)
    for m in (1, 5, 20):
        assert rnumber(witness(fam, "M_m", m)) == RNumber.finite(2 * m)
    fam = ZnSemidirectZ(-IntMatrix.identity(3))
    for m in (1, 5):
        assert rnumber(witness(fam, "M_m", m)) == RNumber.finite(2 * (m + 1))
    for m in (1, 6):
        assert rnumber(witness(ZnSemidirectZ(tahara_form_order2(1)), "phi_alpha", m)) == RNumber.finite(4 * m)
        assert rnumber(witness(ZnSemidirectZ(tahara_form_order2(0)), "phi_alpha", m)) == RNumber.finite(2 * m)
        assert rnumber(witness(ZnSemidirectZ(tahara_form_order3(0)), "phi_alpha", m)) == RNumber.finite(6 * m)
        assert rnumber(witness(ZnSemidirectZ(tahara_form_order3(1)), "phi_alpha", m)) == RNumber.finite(6 * m)
    for r in (1, 3):
        assert rnumber(witness(HnSemidirectZ(3, 2, 5), "M_r", r)) == RNumber.finite(4 * r)
    for r in (2, 6):
        assert rnumber(witness(HnSemidirectZ(2, 1, 1), "M_r", r)) == RNumber.finite(4 * r)
    assert rnumber(witness(Z2MinusIExt(FIB, (2, -1)), "phi_eight", 1)) == RNumber.finite(8)
    assert rnumber(witness(FreeAbelian(2), "target", 9)) == RNumber.finite(9)
    assert rnumber(witness(FreeAbelian(1), "negation", 1)) == RNumber.finite(2)


def test_witness_huge_parameter_no_overflow():
    spec = witness(HeisenbergTimesZ(1), "phi_m", 10 ** 6)
    assert rnumber(spec) == RNumber.finite(4 * 10 ** 6)


def test_witness_errors():
    with pytest.raises(UnknownWitnessError):
        witness(Heisenberg(1), "no-such", 1)
    with pytest.raises(ValueError):
        witness(Heisenberg(1), "phi_m", 0)
    with pytest.raises(UnknownWitnessError):
        witness(ZnSemidirectZ(FIB), "M_m", 1)  # needs the -I action
    with pytest.raises(UnknownWitnessError):
        witness(HnSemidirectZ(2, 1, 0), "M_r", 3)  # odd trace impossible here


def test_rnumber_requires_verified_spec():
    fam = FreeAbelian(2)
    spec = AutomorphismSpec.from_images(fam, {"e1": (0, 1), "e2": (-1, 0)})
    with pytest.raises(ValueError):
        rnumber(spec)
    assert rnumber(replace(spec, verified=True)) == RNumber.finite(2)


def test_rnumber_traces():
    _, trace = rnumber_with_trace(witness(HeisenbergTimesZ(1), "phi_m", 1))
    assert trace == ("rnumber:center-times-quotient",)
    _, trace = rnumber_with_trace(witness(ZnSemidirectZ(tahara_form_order2(1)), "phi_alpha", 1))
    assert trace == ("rnumber:holonomy-averaging",)
    _, trace = rnumber_with_trace(witness(ZnSemidirectZ(-I2), "M_m", 1))
    assert trace == ("rnumber:two-step-addition",)


def test_rnumber_identity_quotient_is_infinite():
    fam = ZnSemidirectZ(FIB)
    spec = AutomorphismSpec.from_images(
        fam, {"e1": (2, 3, 0), "e2": (3, 5, 0), "t": (0, 0, 1)}
    )
    report = verify_automorphism(spec)
    assert report.ok
    assert rnumber(replace(spec, verified=True)) == RNumber.infinite()


def test_minus_i_block_matrix_shape():
    m = minus_i_block_matrix(3, 4)
    assert m.to_rows() == [[0, 0, 1], [1, 0, 0], [0, 1, 4]]


def test_label_classes_identity_on_line_never_completes():
    fam = FreeAbelian(1)
    spec = replace(
        AutomorphismSpec.from_images(fam, {"e1": (1,)}), verified=True
    )
    counts = []
    for radius in (1, 2, 3):
        labeling = label_classes(spec, radius)
        assert not labeling.complete
        counts.append(labeling.class_count)
    assert counts == sorted(counts) and counts[0] < counts[-1]


def test_label_classes_minus_identity_four_classes():
    fam = FreeAbelian(2)
    spec = replace(
        AutomorphismSpec.from_images(fam, {"e1": (-1, 0), "e2": (0, -1)}), verified=True
    )
    labeling = label_classes(spec, 3)
    assert labeling.complete and labeling.class_count == 4
    assert labeling.class_count == rnumber(spec).value


def test_label_classes_matches_formula_for_phi_m():
    spec = witness(HeisenbergTimesZ(1), "phi_m", 1)
    labeling = label_classes(spec, 6)
    assert labeling.complete
    assert labeling.class_count == 4


def test_label_classes_twisted_invariance(rng):
    spec = witness(ZnSemidirectZ(-I2), "M_m", 2)
    labeling = label_classes(spec, 4)
    fam = spec.family
    gens = fam.generators()
    checked = 0
    for _ in range(400):
        g = fam.element([rng.randint(-3, 3) for _ in range(fam.slots)])
        z = rng.choice(gens)
        if rng.random() < 0.5:
            z = z.inverse()
        h = z * g * spec.apply(z).inverse()
        if g.exponents in labeling.labels and h.exponents in labeling.labels:
            assert labeling.labels[g.exponents] == labeling.labels[h.exponents]
            checked += 1
    assert checked > 100


def test_label_classes_requires_verified():
    spec = AutomorphismSpec.from_images(FreeAbelian(1), {"e1": (-1,)})
    with pytest.raises(ValueError):
        label_classes(spec, 2)
    with pytest.raises(ValueError):
        label_classes(replace(spec, verified=True), 0)


def test_spec_json_roundtrip():
    spec = witness(Z2MinusIExt(FIB, (1, 1)), "phi_eight", 1)
    data = json.loads(json.dumps(spec.to_json_dict()))
    back = AutomorphismSpec.from_json_dict(data)
    assert back.images == spec.images
    assert back.family == spec.family
    assert family_from_json({"tag": "heisenberg", "n": 2}) == Heisenberg(2)
    with pytest.raises(ValueError):
        family_from_json({"tag": "mystery"})
