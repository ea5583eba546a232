"""Numeric interpretations that expressions are parametric in.

A :class:`SemiringOps` value is the operation dictionary handed to an
expression: two constants, two binary operations and an equivalence used
when comparing results.
"""
from __future__ import annotations

import itertools
import operator
from dataclasses import dataclass, field
from typing import Callable, Generic, Hashable, Iterable, Sequence, TypeVar

N = TypeVar("N")


@dataclass(frozen=True)
class SemiringOps(Generic[N]):
    zero: N
    one: N
    add: Callable[[N, N], N]
    mul: Callable[[N, N], N]
    equiv: Callable[[N, N], bool] = operator.eq
    name: str = field(default="semiring", compare=False)


def float_semiring(tolerance: float = 1e-9) -> SemiringOps[float]:
    """Floating-point arithmetic compared with a relative tolerance."""
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")

    def equiv(a: float, b: float) -> bool:
        return abs(a - b) <= tolerance * max(1.0, abs(a), abs(b))

    return SemiringOps(0.0, 1.0, operator.add, operator.mul, equiv, name="float")


FLOAT = float_semiring()
NAT: SemiringOps[int] = SemiringOps(0, 1, operator.add, operator.mul, operator.eq, name="nat")


# -- polynomials over natural coefficients (the free commutative semiring) ---

Monomial = tuple  # sorted tuple of variable ids, repeated per power


def _id_key(v: Hashable) -> tuple[str, str]:
    # ids may be of mixed types; order them by type name, then repr
    return (type(v).__name__, repr(v))


def _mono_key(m: Monomial) -> tuple:
    return (len(m), [_id_key(v) for v in m])


@dataclass(frozen=True)
class Poly:
    """Multivariate polynomial with natural-number coefficients.

    ``terms`` is kept canonical: monomials sorted, no zero coefficients.
    Structural equality is therefore polynomial equality.
    """

    terms: tuple[tuple[Monomial, int], ...] = ()

    @classmethod
    def from_dict(cls, coeffs: dict[Monomial, int]) -> Poly:
        items = [(m, c) for m, c in coeffs.items() if c != 0]
        items.sort(key=lambda mc: _mono_key(mc[0]))
        return cls(tuple(items))

    @classmethod
    def const(cls, c: int) -> Poly:
        if c < 0:
            raise ValueError("coefficients are natural numbers")
        return cls.from_dict({(): c})

    @classmethod
    def var(cls, v: Hashable) -> Poly:
        return cls((((v,), 1),))

    def __add__(self, other: Poly) -> Poly:
        acc = dict(self.terms)
        for m, c in other.terms:
            acc[m] = acc.get(m, 0) + c
        return Poly.from_dict(acc)

    def __mul__(self, other: Poly) -> Poly:
        acc: dict[Monomial, int] = {}
        for (m1, c1), (m2, c2) in itertools.product(self.terms, other.terms):
            m = tuple(sorted(m1 + m2, key=_id_key))
            acc[m] = acc.get(m, 0) + c1 * c2
        return Poly.from_dict(acc)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms:
            factors = [str(v) if k == 1 else f"{v}^{k}" for v, k in _powers(m)]
            if c != 1 or not factors:
                factors.insert(0, str(c))
            parts.append("*".join(factors))
        return " + ".join(parts)


def _powers(m: Monomial) -> list[tuple[Hashable, int]]:
    return [(v, len(list(g))) for v, g in itertools.groupby(m)]


POLY: SemiringOps[Poly] = SemiringOps(
    Poly(), Poly.const(1), operator.add, operator.mul, operator.eq, name="poly"
)


# -- helpers -----------------------------------------------------------------

def nat_embed(ops: SemiringOps[N], n: int) -> N:
    """Embed the natural number ``n`` as ``1 + 1 + ... + 1`` by double-and-add."""
    if n < 0:
        raise ValueError("n must be a natural number")
    if n == 0:
        return ops.zero
    acc = ops.one
    for bit in bin(n)[3:]:
        acc = ops.add(acc, acc)
        if bit == "1":
            acc = ops.add(acc, ops.one)
    return acc


def axioms_hold(ops: SemiringOps[N], samples: Sequence[N]) -> bool:
    """Check the semiring axioms (commutative multiplication included) on
    every pair and triple drawn from ``samples``."""
    if not samples:
        raise ValueError("samples must be non-empty")
    eq, add, mul = ops.equiv, ops.add, ops.mul
    zero, one = ops.zero, ops.one
    for a in samples:
        if not eq(a, a):
            return False
        if not (eq(add(a, zero), a) and eq(add(zero, a), a)):
            return False
        if not (eq(mul(a, one), a) and eq(mul(one, a), a)):
            return False
        if not (eq(mul(a, zero), zero) and eq(mul(zero, a), zero)):
            return False
    for a, b in itertools.product(samples, repeat=2):
        if not eq(add(a, b), add(b, a)):
            return False
        if not eq(mul(a, b), mul(b, a)):
            return False
        if eq(a, b) != eq(b, a):
            return False
    for a, b, c in itertools.product(samples, repeat=3):
        if not eq(add(add(a, b), c), add(a, add(b, c))):
            return False
        if not eq(mul(mul(a, b), c), mul(a, mul(b, c))):
            return False
        if not eq(mul(a, add(b, c)), add(mul(a, b), mul(a, c))):
            return False
        if not eq(mul(add(a, b), c), add(mul(a, c), mul(b, c))):
            return False
        # congruence of equiv w.r.t. add and mul
        if eq(a, b) and not (eq(add(a, c), add(b, c)) and eq(mul(a, c), mul(b, c))):
            return False
        # transitivity
        if eq(a, b) and eq(b, c) and not eq(a, c):
            return False
    return True


def iter_samples(ops: SemiringOps[N], values: Iterable[int]) -> list[N]:
    """Natural numbers embedded into ``ops``; handy sample sets."""
    return [nat_embed(ops, n) for n in values]
