"""Forward-mode differentiation with dual numbers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Generic, TypeVar

from .expr import Expression
from .semiring import SemiringOps

N = TypeVar("N")


@dataclass(frozen=True)
class Dual(Generic[N]):
    v: N  # value
    d: N  # derivative


def dual_ops(base: SemiringOps[N]) -> SemiringOps[Dual[N]]:
    add, mul = base.add, base.mul

    def dadd(a: Dual[N], b: Dual[N]) -> Dual[N]:
        return Dual(add(a.v, b.v), add(a.d, b.d))

    def dmul(a: Dual[N], b: Dual[N]) -> Dual[N]:
        return Dual(mul(a.v, b.v), add(mul(a.d, b.v), mul(a.v, b.d)))

    def equiv(a: Dual[N], b: Dual[N]) -> bool:
        return base.equiv(a.v, b.v) and base.equiv(a.d, b.d)

    return SemiringOps(
        Dual(base.zero, base.zero), Dual(base.one, base.zero), dadd, dmul, equiv,
        name=f"dual({base.name})",
    )


def diff_forward(e: Expression) -> Expression:
    def fn(ops: SemiringOps[Any], r: Any) -> Any:
        return e.evaluate(dual_ops(ops), Dual(r, ops.one)).d

    return Expression(fn, name=f"diff_forward({e.name})")
