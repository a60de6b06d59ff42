"""
Exact GF(p^k) arithmetic for the incidence engine.
"""

from .gf import (
    FieldElement,
    FieldSpec,
    build_field,
    field_arith,
    field_for_order,
    is_irreducible,
    parse_field_order,
    smallest_irreducible,
)

__all__ = [
    'FieldElement',
    'FieldSpec',
    'build_field',
    'field_arith',
    'field_for_order',
    'is_irreducible',
    'parse_field_order',
    'smallest_irreducible',
]
