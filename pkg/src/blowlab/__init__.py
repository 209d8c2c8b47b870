"""blowlab: exact-arithmetic verification lab for Virasoro blow-up equations,
characters, Whittaker blocks and the associated OPE structures.

Everything computes over Q (plus a sqrt(2) extension inside the OPE engine);
no floating point is used anywhere.
"""

__version__ = "0.1.0"

from ._scalar import Q
from .blowup import (
    BlowupFrame,
    blowup_verify,
    f_hat,
    f_relations_verify,
    hirota_apply,
    l_k_product,
    l_k_solve,
    whittaker_eigen_check,
)
from .characters import (
    char_degenerate,
    char_lattice_urod,
    char_minimal,
    char_verma,
    verify_char_identity,
)
from .configurations import (
    config_identity_checks,
    enumerate_configs,
    fermionic_sum,
    split_check,
)
from .nekrasov import agt_crosscheck, nekrasov_Z, z2_coefficient
from .ope import (
    FieldExpr,
    ModuleVector,
    OPEResult,
    Root2,
    StressTensorCatalog,
    VirasoroResult,
    ansatz_verify,
    commute_test,
    fock_mode_action,
    identity_tests,
    l0_spectrum,
    ope_singular,
    primary_test,
    virasoro_test,
)
from .rational import RF, SYMBOLS, Poly, RationalFunction, rf_identity_check
from .series import GradedSeries, equal_to_order, pochhammer_inf, pochhammer_inf_inverse
from .verdict import Verdict
from .verma import (
    GramMatrix,
    LevelBasis,
    block,
    gram,
    kac_vanishing_check,
    whittaker_components,
)

__all__ = [
    "BlowupFrame",
    "FieldExpr",
    "GradedSeries",
    "GramMatrix",
    "LevelBasis",
    "ModuleVector",
    "OPEResult",
    "Poly",
    "Q",
    "RF",
    "RationalFunction",
    "Root2",
    "SYMBOLS",
    "StressTensorCatalog",
    "Verdict",
    "VirasoroResult",
    "agt_crosscheck",
    "ansatz_verify",
    "block",
    "blowup_verify",
    "char_degenerate",
    "char_lattice_urod",
    "char_minimal",
    "char_verma",
    "commute_test",
    "config_identity_checks",
    "enumerate_configs",
    "equal_to_order",
    "f_hat",
    "f_relations_verify",
    "fermionic_sum",
    "fock_mode_action",
    "gram",
    "hirota_apply",
    "identity_tests",
    "kac_vanishing_check",
    "l0_spectrum",
    "l_k_product",
    "l_k_solve",
    "nekrasov_Z",
    "ope_singular",
    "pochhammer_inf",
    "pochhammer_inf_inverse",
    "primary_test",
    "rf_identity_check",
    "split_check",
    "verify_char_identity",
    "virasoro_test",
    "whittaker_components",
    "whittaker_eigen_check",
    "z2_coefficient",
    "__version__",
]
