"""
Exact incidence counting, degree profiles and the energy lemma.
"""

from .counting import (
    CsChain,
    DegreeProfile,
    EnergyQuery,
    EnergyResult,
    IncidenceReport,
    METHODS,
    count_incidences,
    count_relation,
    cs_chain,
    degree_profile,
    energy_of,
    exact_sqrt_le,
    indexed_direction,
    max_common_flats,
    max_common_points,
    phi_solutions,
    relation_matrix,
)

__all__ = [
    'CsChain',
    'DegreeProfile',
    'EnergyQuery',
    'EnergyResult',
    'IncidenceReport',
    'METHODS',
    'count_incidences',
    'count_relation',
    'cs_chain',
    'degree_profile',
    'energy_of',
    'exact_sqrt_le',
    'indexed_direction',
    'max_common_flats',
    'max_common_points',
    'phi_solutions',
    'relation_matrix',
]
