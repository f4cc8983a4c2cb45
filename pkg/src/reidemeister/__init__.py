"""Exact Reidemeister numbers and spectra for solvmanifold fundamental
groups of Hirsch length at most 4."""

__version__ = "0.1.0"

from .exactlin import (
    EigenProfile,
    IntMatrix,
    LatticeBasis,
    RatMatrix,
    SNFResult,
    det,
    eigenlattice,
    eigenvalue_profile,
    finite_order,
    in_centralizer_span,
    lattice_membership,
    parse_matrix,
    smith_normal_form,
)
from .twisted import (
    HolonomySet,
    RNumber,
    r_abelian,
    r_abelian_via_cosets,
    r_addition,
    r_averaging,
    r_quadruple,
    r_semidirect_zn,
)
from .groups import (
    AutomorphismSpec,
    ClassLabeling,
    FreeAbelian,
    GroupElement,
    Heisenberg,
    HeisenbergTimesZ,
    HnSemidirectZ,
    Z2MinusIExt,
    ZnSemidirectZ,
    label_classes,
    rnumber,
    verify_automorphism,
    witness,
)
from .spectra import (
    SpectrumDescriptor,
    SpectrumResult,
    System2Witness,
    canonicalize_z2_by_z2,
    classify_hn_semidirect,
    classify_nilpotent,
    classify_z2_minusI_ext,
    classify_z2_semidirect,
    classify_z3_semidirect,
    decide_system2,
    decide_z3_eight,
    tahara_delta,
)
