"""Expressions as computations polymorphic in their numeric interpretation.

An :class:`Expression` wraps a function ``(ops, x) -> value`` that may only
touch numbers through ``ops`` and ``x``.  Nothing else about it can be
inspected; differentiation works by running it under a chosen ``ops``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Iterator

from .semiring import SemiringOps
from .symbolic import ADD, TREES, X, Env, Leaf, Node, SymExpr, eval_env, random_tree, vars


@dataclass(frozen=True)
class Expression:
    """A define-by-run expression.

    ``fn(ops, x)`` must be parametric: it may combine numbers only with
    ``ops.add``/``ops.mul``, start only from ``ops.zero``, ``ops.one`` and
    ``x``, and must not intercept effects raised by those operations.  It
    may be evaluated any number of times.
    """

    fn: Callable[[SemiringOps[Any], Any], Any]
    name: str = "<expr>"

    def evaluate(self, ops: SemiringOps[Any], x: Any) -> Any:
        return self.fn(ops, x)

    def __repr__(self) -> str:
        return f"Expression({self.name})"


def evaluate(e: Expression, ops: SemiringOps[Any], x: Any) -> Any:
    return e.fn(ops, x)


def variable() -> Expression:
    return Expression(lambda ops, x: x, name="x")


def from_ast(s: SymExpr) -> Expression:
    """Turn a univariate tree into an expression that replays it."""
    foreign = vars(s) - {X}
    if foreign:
        raise ValueError(f"from_ast: tree mentions ids other than x: {sorted(map(repr, foreign))}")
    return Expression(lambda ops, x: eval_env(s, ops, Env({X: x}, default=ops.zero)), name="ast")


def reify(e: Expression) -> SymExpr:
    """Run ``e`` in the syntax-tree interpretation."""
    return e.evaluate(TREES, Leaf(X))


class _CountingOps:
    """Wraps an ops dictionary and counts add/mul calls."""

    def __init__(self, ops: SemiringOps[Any]):
        self.count = 0
        self.ops = SemiringOps(ops.zero, ops.one, self._wrap(ops.add), self._wrap(ops.mul),
                               ops.equiv, name=ops.name)

    def _wrap(self, f):
        def g(a, b):
            self.count += 1
            return f(a, b)
        return g


def operation_count(e: Expression) -> int:
    """Number of add/mul operations one evaluation of ``e`` performs
    (equivalently, the number of nodes constructed while reifying it)."""
    c = _CountingOps(TREES)
    e.evaluate(c.ops, Leaf(X))
    return c.count


# -- corpus ------------------------------------------------------------------

def _cube(ops, x):
    add, mul = ops.add, ops.mul
    x1 = add(x, ops.one)
    return mul(mul(x1, x1), x1)


def cube() -> Expression:
    """(x + 1)^3"""
    return Expression(_cube, name="cube")


def monomial(k: int) -> Expression:
    """x^k by fast exponentiation.

    The loop, the integer arithmetic on ``k`` and the mutable accumulators
    are invisible to whoever evaluates the expression.  The squaring also
    runs on the final iteration, so the last product computed is unused.
    """
    if k < 0:
        raise ValueError("monomial: k must be a natural number")

    def fn(ops, x):
        result, base, n = ops.one, x, k
        while n > 0:
            if n % 2 == 1:
                result = ops.mul(base, result)
            base = ops.mul(base, base)
            n //= 2
        return result

    return Expression(fn, name=f"monomial({k})")


def constant_one() -> Expression:
    return Expression(lambda ops, x: ops.one, name="1")


def shared_sum() -> Expression:
    """x*x + x*x with the product computed once and reused."""
    def fn(ops, x):
        sq = ops.mul(x, x)
        return ops.add(sq, sq)
    return Expression(fn, name="shared_sum")


def corpus(seed: int = 0, n_random: int = 12, max_depth: int = 5) -> Iterator[Expression]:
    """The expressions the cross-checks run on: cube, monomials 0..16, a few
    hand-written shapes and seeded random trees."""
    yield cube()
    for k in range(17):
        yield monomial(k)
    yield variable()
    yield constant_one()
    yield shared_sum()
    yield from_ast(Node(ADD, Leaf(X), Leaf(X)))
    rng = random.Random(seed)
    for i in range(n_random):
        e = from_ast(random_tree(rng, max_depth))
        yield Expression(e.fn, name=f"random[{seed}:{i}]")
