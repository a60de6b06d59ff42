"""
# Finite field module: exact GF(p^k) arithmetic with deterministic construction.

Elements are encoded as integers in [0, q): the base-p digits of the encoding are the
coefficients (low degree first) of a polynomial reduced modulo the field's modulus.
Every operation accepts python ints or numpy integer arrays and returns the same kind.
"""

import hashlib
import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from sympy import factorint, isprime

from app.engine.errors import FieldError, SizeCapError

logger = logging.getLogger(__name__)

MAX_DEGREE = 4
MAX_ORDER = 2 ** 20
TABLE_ORDER_CAP = 2 ** 12
_TABLE_BLOCK = 256

Operand = Union[int, np.ndarray]


def _is_scalar(value) -> bool:
    return isinstance(value, (int, np.integer))


def _poly_mod(dividend: list, divisor: Tuple[int, ...], p: int) -> list:
    """Remainder of dividend modulo a monic divisor, both low-to-high coefficient lists over GF(p)."""
    remainder = [c % p for c in dividend]
    deg = len(divisor) - 1
    for top in range(len(remainder) - 1, deg - 1, -1):
        coef = remainder[top]
        if coef:
            for i in range(deg + 1):
                remainder[top - deg + i] = (remainder[top - deg + i] - coef * divisor[i]) % p
    return remainder[:deg]


def is_irreducible(coeffs: Tuple[int, ...], p: int) -> bool:
    """
    Exhaustive irreducibility test for a monic polynomial over GF(p).

    Tries every monic divisor of degree 1..deg//2, which is enough for the degrees
    this module supports (deg <= 4).

    Args:
        coeffs (Tuple[int, ...]): Coefficients low-to-high, leading coefficient 1.
        p (int): The characteristic.

    Returns:
        bool: True iff no proper monic factor exists.
    """
    deg = len(coeffs) - 1
    if deg <= 1:
        return deg == 1
    for factor_deg in range(1, deg // 2 + 1):
        for tail in itertools.product(range(p), repeat=factor_deg):
            divisor = tail + (1,)
            if not any(_poly_mod(list(coeffs), divisor, p)):
                return False
    return True


def smallest_irreducible(p: int, k: int) -> Tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree k, coefficients compared low-to-high."""
    for tail in itertools.product(range(p), repeat=k):
        candidate = tail + (1,)
        if is_irreducible(candidate, p):
            return candidate
    raise FieldError(f"no irreducible polynomial of degree {k} over GF({p})")


@dataclass(frozen=True, eq=False)
class FieldTables:
    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray
    inv: np.ndarray


@dataclass(frozen=True)
class FieldSpec:
    """
    Immutable description of GF(q), q = p^k.

    Fields:
    - p (int): The characteristic, prime.
    - k (int): Extension degree, 1 <= k <= 4.
    - q (int): Field order p^k.
    - modulus (Tuple[int, ...]): Monic irreducible of degree k, low-to-high coefficients
      including the leading 1; empty for prime fields.
    - tables (FieldTables, optional): Dense operation tables, present when q <= 2^12.
    """
    p: int
    k: int
    q: int
    modulus: Tuple[int, ...]
    tables: Optional[FieldTables] = field(default=None, compare=False, repr=False)

    # ----- encoding helpers -------------------------------------------------------

    def _digits(self, a):
        return [(a // self.p ** i) % self.p for i in range(self.k)]

    def _compose(self, digits):
        total = 0
        for i, d in enumerate(digits):
            total = total + (d % self.p) * self.p ** i
        return total

    def _coerce(self, *operands):
        scalar = all(_is_scalar(o) for o in operands)
        values = []
        for o in operands:
            if scalar:
                value = int(o)
                if not 0 <= value < self.q:
                    raise FieldError(f"encoding {value} is not an element of GF({self.q})")
            else:
                value = np.asarray(o, dtype=np.int64)
                if value.size and (value.min() < 0 or value.max() >= self.q):
                    raise FieldError(f"array holds encodings outside GF({self.q})")
            values.append(value)
        return scalar, values

    @staticmethod
    def _finish(result, scalar: bool):
        return int(result) if scalar else result

    # ----- on-the-fly arithmetic --------------------------------------------------

    def _add_direct(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        da, db = self._digits(a), self._digits(b)
        return self._compose([x + y for x, y in zip(da, db)])

    def _neg_direct(self, a):
        if self.k == 1:
            return (-a) % self.p
        return self._compose([-x for x in self._digits(a)])

    def _mul_direct(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.k - 1)
        for i in range(self.k):
            for j in range(self.k):
                prod[i + j] = prod[i + j] + da[i] * db[j]
        for top in range(2 * self.k - 2, self.k - 1, -1):
            coef = prod[top] % self.p
            for i in range(self.k):
                prod[top - self.k + i] = prod[top - self.k + i] - coef * self.modulus[i]
        return self._compose(prod[:self.k])

    def _pow_direct(self, a, exponent: int):
        result = a * 0 + 1
        base = a
        while exponent:
            if exponent & 1:
                result = self._mul_direct(result, base)
            base = self._mul_direct(base, base)
            exponent >>= 1
        return result

    # ----- public arithmetic ------------------------------------------------------

    def add(self, a: Operand, b: Operand, use_tables: bool = True) -> Operand:
        scalar, (a, b) = self._coerce(a, b)
        if use_tables and self.tables is not None:
            return self._finish(self.tables.add[a, b], scalar)
        return self._finish(self._add_direct(a, b), scalar)

    def neg(self, a: Operand, use_tables: bool = True) -> Operand:
        scalar, (a,) = self._coerce(a)
        if use_tables and self.tables is not None:
            return self._finish(self.tables.neg[a], scalar)
        return self._finish(self._neg_direct(a), scalar)

    def sub(self, a: Operand, b: Operand, use_tables: bool = True) -> Operand:
        return self.add(a, self.neg(b, use_tables), use_tables)

    def mul(self, a: Operand, b: Operand, use_tables: bool = True) -> Operand:
        scalar, (a, b) = self._coerce(a, b)
        if use_tables and self.tables is not None:
            return self._finish(self.tables.mul[a, b], scalar)
        return self._finish(self._mul_direct(a, b), scalar)

    def inv(self, a: Operand, use_tables: bool = True) -> Operand:
        scalar, (a,) = self._coerce(a)
        if np.any(np.asarray(a) == 0):
            raise FieldError("inversion of zero")
        if use_tables and self.tables is not None:
            return self._finish(self.tables.inv[a], scalar)
        return self._finish(self._pow_direct(a, self.q - 2), scalar)

    def pow(self, a: Operand, exponent: int, use_tables: bool = True) -> Operand:
        if exponent < 0:
            a = self.inv(a, use_tables)
            exponent = -exponent
        scalar, (a,) = self._coerce(a)
        if use_tables and self.tables is not None:
            result = a * 0 + 1
            base = a
            while exponent:
                if exponent & 1:
                    result = self.tables.mul[result, base]
                base = self.tables.mul[base, base]
                exponent >>= 1
            return self._finish(result, scalar)
        return self._finish(self._pow_direct(a, exponent), scalar)

    def dot(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Inner product over the last axis of two broadcastable encoding arrays."""
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        acc = self.mul(x[..., 0], y[..., 0])
        for j in range(1, x.shape[-1]):
            acc = self.add(acc, self.mul(x[..., j], y[..., j]))
        return acc

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def element(self, encoding: int) -> "FieldElement":
        return FieldElement(self, encoding)

    def fingerprint(self) -> str:
        """sha256 over the defining parameters and, when present, the operation tables."""
        digest = hashlib.sha256(repr((self.p, self.k, self.q, self.modulus)).encode())
        if self.tables is not None:
            for table in (self.tables.add, self.tables.mul, self.tables.neg, self.tables.inv):
                digest.update(np.ascontiguousarray(table, dtype=np.int64).tobytes())
        return digest.hexdigest()


@dataclass(frozen=True)
class FieldElement:
    """An element of a concrete field; thin operator wrapper over FieldSpec arithmetic."""
    spec: FieldSpec
    encoding: int

    def __post_init__(self):
        if not 0 <= self.encoding < self.spec.q:
            raise FieldError(f"encoding {self.encoding} is not an element of GF({self.spec.q})")

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.spec != self.spec:
                raise FieldError("operands belong to different fields")
            return other.encoding
        return int(other)

    def __add__(self, other):
        return FieldElement(self.spec, self.spec.add(self.encoding, self._other(other)))

    def __sub__(self, other):
        return FieldElement(self.spec, self.spec.sub(self.encoding, self._other(other)))

    def __mul__(self, other):
        return FieldElement(self.spec, self.spec.mul(self.encoding, self._other(other)))

    def __neg__(self):
        return FieldElement(self.spec, self.spec.neg(self.encoding))

    def __pow__(self, exponent: int):
        return FieldElement(self.spec, self.spec.pow(self.encoding, exponent))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.spec, self.spec.inv(self.encoding))

    def __int__(self):
        return self.encoding


def _build_tables(spec: FieldSpec) -> FieldTables:
    q = spec.q
    elements = np.arange(q, dtype=np.int64)
    add = np.empty((q, q), dtype=np.int64)
    mul = np.empty((q, q), dtype=np.int64)
    for start in range(0, q, _TABLE_BLOCK):
        rows = elements[start:start + _TABLE_BLOCK, None]
        add[start:start + _TABLE_BLOCK] = spec._add_direct(rows, elements[None, :])
        mul[start:start + _TABLE_BLOCK] = spec._mul_direct(rows, elements[None, :])
    neg = spec._neg_direct(elements)
    inv = np.zeros(q, dtype=np.int64)
    inv[1:] = np.argmax(mul[1:] == 1, axis=1)
    for table in (add, mul, neg, inv):
        table.setflags(write=False)
    return FieldTables(add=add, mul=mul, neg=neg, inv=inv)


@lru_cache(maxsize=None)
def build_field(p: int, k: int = 1) -> FieldSpec:
    """
    Build GF(p^k) deterministically.

    Args:
        p (int): Prime characteristic.
        k (int): Extension degree, 1 <= k <= 4.

    Returns:
        FieldSpec: The field, with dense tables when p^k <= 2^12.

    Raises:
        FieldError: If p is not prime or k is out of range.
        SizeCapError: If p^k exceeds 2^20.
    """
    if not isinstance(p, (int, np.integer)) or not isprime(int(p)):
        raise FieldError(f"non-prime characteristic {p}")
    if not 1 <= k <= MAX_DEGREE:
        raise FieldError(f"extension degree {k} out of range 1..{MAX_DEGREE}")
    q = int(p) ** k
    if q > MAX_ORDER:
        raise SizeCapError(f"field order {q} exceeds the cap {MAX_ORDER}")
    modulus = smallest_irreducible(int(p), k) if k > 1 else ()
    spec = FieldSpec(p=int(p), k=k, q=q, modulus=modulus)
    if q <= TABLE_ORDER_CAP:
        spec = FieldSpec(p=spec.p, k=k, q=q, modulus=modulus, tables=_build_tables(spec))
    logger.debug("built GF(%d^%d) modulus=%s tables=%s", p, k, modulus, spec.tables is not None)
    return spec


def parse_field_order(q: int) -> Tuple[int, int]:
    """Decompose a field order into (p, k); raises FieldError for non-prime-powers."""
    if not isinstance(q, (int, np.integer)) or q < 2:
        raise FieldError(f"unsupported field order {q}")
    factors = factorint(int(q))
    if len(factors) != 1:
        raise FieldError(f"unsupported field order {q}")
    (p, k), = factors.items()
    return int(p), int(k)


def field_for_order(q: int) -> FieldSpec:
    p, k = parse_field_order(q)
    return build_field(p, k)


def field_arith(spec: FieldSpec, op: str, *operands, use_tables: bool = True) -> Operand:
    """
    Dispatch a named field operation.

    Args:
        spec (FieldSpec): The field.
        op (str): One of add, sub, mul, neg, inv, pow.
        *operands: Encodings (ints or arrays); pow takes (base, exponent).
        use_tables (bool): Use dense tables when the field carries them.

    Returns:
        The encoded result.
    """
    if op == "add":
        return spec.add(*operands, use_tables=use_tables)
    if op == "sub":
        return spec.sub(*operands, use_tables=use_tables)
    if op == "mul":
        return spec.mul(*operands, use_tables=use_tables)
    if op == "neg":
        return spec.neg(*operands, use_tables=use_tables)
    if op == "inv":
        return spec.inv(*operands, use_tables=use_tables)
    if op == "pow":
        base, exponent = operands
        return spec.pow(base, int(exponent), use_tables=use_tables)
    raise FieldError(f"unknown field operation {op!r}")
