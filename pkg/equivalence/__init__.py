"""Quasi-LU and LU equivalence pipelines for two and three parties."""
from .report import (
    CONSISTENT_AT_HORIZON,
    EQUIVALENT,
    PIPELINE_DISTINGUISHED,
    PIPELINE_INCONCLUSIVE,
    EquivalenceReport,
    NormCheck,
    identity_verdict,
    norm_check,
)
from .two_qudit import Rep2, check_lu_2qubit, check_quasi_lu_2, rep2_from, so2_witness_check
from .three_qudit import (
    ConditionLedger,
    GramInfo,
    QubitExtras,
    Rep3,
    build_battery_v1,
    build_battery_v2,
    check_quasi_lu_3,
    gram_conditions,
    necessary_screen_3,
    qubit_lu_upgrade,
    rep3_from,
    so3_witness_check,
)

__all__ = [
    'EQUIVALENT',
    'CONSISTENT_AT_HORIZON',
    'PIPELINE_DISTINGUISHED',
    'PIPELINE_INCONCLUSIVE',
    'EquivalenceReport',
    'NormCheck',
    'identity_verdict',
    'norm_check',
    'Rep2',
    'rep2_from',
    'so2_witness_check',
    'check_quasi_lu_2',
    'check_lu_2qubit',
    'Rep3',
    'rep3_from',
    'so3_witness_check',
    'necessary_screen_3',
    'build_battery_v1',
    'build_battery_v2',
    'gram_conditions',
    'GramInfo',
    'QubitExtras',
    'ConditionLedger',
    'check_quasi_lu_3',
    'qubit_lu_upgrade',
]
