"""
Verifiers for the incidence bounds; each returns a BoundReport.
"""

from .theorems import (
    BoundReport,
    DEFAULT_THRESHOLD_EXPONENT,
    EnergyReduction,
    LAMBDA_MODES,
    PROOF_THRESHOLD_EXPONENT,
    SdzParams,
    build_energy_reduction,
    graph_spectrum,
    verify_cartesian,
    verify_cs,
    verify_hyperplane,
    verify_sdz,
    verify_vinh,
)

__all__ = [
    'BoundReport',
    'DEFAULT_THRESHOLD_EXPONENT',
    'EnergyReduction',
    'LAMBDA_MODES',
    'PROOF_THRESHOLD_EXPONENT',
    'SdzParams',
    'build_energy_reduction',
    'graph_spectrum',
    'verify_cartesian',
    'verify_cs',
    'verify_hyperplane',
    'verify_sdz',
    'verify_vinh',
]
