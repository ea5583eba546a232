"""Tree expressions, the sequential (context) view, and symbolic derivatives.

This is the oracle that every AD backend is checked against.  Nothing here
simplifies: derivatives come out exactly as the six derivation laws build
them.

Trees may share subtrees (the reifier and the parser both produce DAGs).
Traversals therefore memoize on node identity, which keeps them linear in
the number of distinct nodes.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Callable, Generic, Hashable, Iterable, Mapping, Sequence, TypeVar, Union

from .semiring import POLY, Poly, SemiringOps

N = TypeVar("N")
VarId = Hashable

X = "x"


class Op(enum.Enum):
    ADD = "+"
    MUL = "*"


ADD, MUL = Op.ADD, Op.MUL


@dataclass(frozen=True)
class Leaf:
    id: VarId


@dataclass(frozen=True)
class _Zero:
    pass


@dataclass(frozen=True)
class _One:
    pass


@dataclass(frozen=True)
class Node:
    op: Op
    left: "SymExpr"
    right: "SymExpr"


Zero = _Zero()
One = _One()
SymExpr = Union[Leaf, _Zero, _One, Node]


class Env(Generic[N]):
    """A total map from identifiers to numbers: explicit bindings plus a default."""

    def __init__(self, bindings: Mapping[VarId, N] | None = None, default: N | None = None,
                 fallback: Callable[[VarId], N] | None = None):
        self._bindings = dict(bindings or {})
        self._default = default
        self._fallback = fallback

    def __call__(self, i: VarId) -> N:
        if i in self._bindings:
            return self._bindings[i]
        if self._fallback is not None:
            return self._fallback(i)
        return self._default

    def __repr__(self) -> str:
        return f"Env({self._bindings!r}, default={self._default!r})"


def _postorder(e: SymExpr) -> list[SymExpr]:
    """Distinct nodes of ``e`` (by identity), children before parents,
    left subtree before right subtree."""
    out: list[SymExpr] = []
    seen: set[int] = set()
    stack: list[tuple[SymExpr, bool]] = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded or not isinstance(node, Node):
            seen.add(id(node))
            out.append(node)
            continue
        stack.append((node, True))
        stack.append((node.right, False))
        stack.append((node.left, False))
    return out


def eval_env(e: SymExpr, ops: SemiringOps[N], env: Callable[[VarId], N],
             memo: dict[int, N] | None = None) -> N:
    """Evaluate ``e`` in ``ops`` with leaves looked up in ``env``.

    Shared subtrees are evaluated once, left operand first.  Passing the
    same ``memo`` to several calls (same ``ops`` and ``env``, trees kept
    alive) shares that work across trees.
    """
    val: dict[int, N] = {} if memo is None else memo
    for node in _postorder(e):
        if id(node) in val:
            continue
        if isinstance(node, Node):
            a, b = val[id(node.left)], val[id(node.right)]
            val[id(node)] = ops.add(a, b) if node.op is ADD else ops.mul(a, b)
        elif isinstance(node, Leaf):
            val[id(node)] = env(node.id)
        elif isinstance(node, _Zero):
            val[id(node)] = ops.zero
        else:
            val[id(node)] = ops.one
    return val[id(e)]


def partial_derivative(e: SymExpr, j: VarId) -> SymExpr:
    d: dict[int, SymExpr] = {}
    for node in _postorder(e):
        if isinstance(node, Leaf):
            d[id(node)] = One if node.id == j else Zero
        elif isinstance(node, Node):
            dl, dr = d[id(node.left)], d[id(node.right)]
            if node.op is ADD:
                d[id(node)] = Node(ADD, dl, dr)
            else:
                d[id(node)] = Node(ADD, Node(MUL, dl, node.right), Node(MUL, node.left, dr))
        else:
            d[id(node)] = Zero
    return d[id(e)]


def vars(e: SymExpr) -> set[VarId]:  # noqa: A001 - mirrors the mathematical name
    return {n.id for n in _postorder(e) if isinstance(n, Leaf)}


def derivative(e: SymExpr) -> SymExpr:
    """Derivative of a univariate expression with respect to ``X``."""
    foreign = vars(e) - {X}
    if foreign:
        raise ValueError(f"univariate expression expected, found ids {sorted(map(repr, foreign))}")
    return partial_derivative(e, X)


def to_poly(e: SymExpr) -> Poly:
    """Normal form of ``e`` in the free commutative semiring."""
    return eval_env(e, POLY, Poly.var)


def equiv_free(e1: SymExpr, e2: SymExpr) -> bool:
    return to_poly(e1) == to_poly(e2)


def node_count(e: SymExpr) -> int:
    """Number of distinct internal nodes (DAG size, sharing counted once)."""
    return sum(isinstance(n, Node) for n in _postorder(e))


def tree_size(e: SymExpr) -> int:
    """Number of internal nodes when ``e`` is unfolded into a tree."""
    size: dict[int, int] = {}
    for node in _postorder(e):
        if isinstance(node, Node):
            size[id(node)] = 1 + size[id(node.left)] + size[id(node.right)]
        else:
            size[id(node)] = 0
    return size[id(e)]


# The syntax-tree interpretation: add/mul build nodes.
TREES: SemiringOps[SymExpr] = SemiringOps(
    Zero, One,
    lambda a, b: Node(ADD, a, b),
    lambda a, b: Node(MUL, a, b),
    equiv_free,
    name="trees",
)


def substitute(e: SymExpr, f: Callable[[VarId], SymExpr]) -> SymExpr:
    """Evaluate ``e`` in the free semiring under ``f``: replace each leaf ``i`` by ``f(i)``."""
    return eval_env(e, TREES, f)


def render(e: SymExpr) -> str:
    """Fully parenthesized infix text, e.g. ``((x*x)+(x*1))``."""
    txt: dict[int, str] = {}
    for node in _postorder(e):
        if isinstance(node, Node):
            txt[id(node)] = f"({txt[id(node.left)]}{node.op.value}{txt[id(node.right)]})"
        elif isinstance(node, Leaf):
            txt[id(node)] = str(node.id)
        else:
            txt[id(node)] = "0" if isinstance(node, _Zero) else "1"
    return txt[id(e)]


# -- sequential view ---------------------------------------------------------

@dataclass(frozen=True)
class Binding:
    """``let u = a op b``."""

    u: VarId
    op: Op
    a: VarId
    b: VarId


Context = Sequence[Binding]


def defs(k: Context) -> list[VarId]:
    return [b.u for b in k]


def fill_all(k: Context) -> dict[VarId, SymExpr]:
    """``fill(k, u)`` for every ``u`` defined in ``k``, sharing subtrees.

    Walking left to right and overwriting on redefinition gives the same
    trees as peeling bindings off the right end.
    """
    trees: dict[VarId, SymExpr] = {}
    for b in k:
        left = trees[b.a] if b.a in trees else Leaf(b.a)
        right = trees[b.b] if b.b in trees else Leaf(b.b)
        trees[b.u] = Node(b.op, left, right)
    return trees


def fill(k: Context, y: VarId) -> SymExpr:
    """Convert the pair ``(k, y)`` into a tree."""
    trees = fill_all(k)
    return trees[y] if y in trees else Leaf(y)


def extend_env(env: Callable[[VarId], N], k: Context, ops: SemiringOps[N]) -> Env[N]:
    """``env`` extended by running the bindings of ``k`` left to right."""
    vals: dict[VarId, N] = {}
    lookup = lambda i: vals[i] if i in vals else env(i)  # noqa: E731
    for b in k:
        va, vb = lookup(b.a), lookup(b.b)
        vals[b.u] = ops.add(va, vb) if b.op is ADD else ops.mul(va, vb)
    return Env(vals, fallback=env)


# -- chain rules -------------------------------------------------------------

def chain_rule_residual(e: SymExpr, f: Callable[[VarId], SymExpr], theta: Callable[[VarId], N],
                        j: VarId, ops: SemiringOps[N]) -> tuple[N, N]:
    """Both sides of the chain rule for the substitution ``e[i := f(i)]``.

    lhs is the partial derivative of the substituted expression w.r.t. ``j``
    at ``theta``; rhs sums, over the variables of ``e``, the outer partial
    (evaluated at the inner values) times the inner partial.
    """
    lhs = eval_env(partial_derivative(substitute(e, f), j), ops, theta)
    inner = Env(fallback=lambda i: eval_env(f(i), ops, theta))
    rhs = ops.zero
    for i in sorted(vars(e), key=repr):
        outer = eval_env(partial_derivative(e, i), ops, inner)
        rhs = ops.add(rhs, ops.mul(outer, eval_env(partial_derivative(f(i), j), ops, theta)))
    return lhs, rhs


def left_end_chain_rule_residual(k1: Context, b: Binding, k2: Context, y: VarId, x: VarId,
                                 env: Callable[[VarId], N], ops: SemiringOps[N]) -> tuple[N, N]:
    """Both sides of the chain rule for a binding added at the left end of ``k2``."""
    if x == b.u:
        raise ValueError("the differentiation variable must differ from the bound id")
    env1 = extend_env(env, k1, ops)
    env1b = extend_env(env, [*k1, b], ops)
    lhs = eval_env(partial_derivative(fill([b, *k2], y), x), ops, env1)
    rest = fill(k2, y)
    d_x = eval_env(partial_derivative(rest, x), ops, env1b)
    d_u = eval_env(partial_derivative(rest, b.u), ops, env1b)
    d_op = eval_env(partial_derivative(Node(b.op, Leaf(b.a), Leaf(b.b)), x), ops, env1)
    return lhs, ops.add(d_x, ops.mul(d_u, d_op))


# -- random generators (tests and the CLI's self-check) ---------------------

def random_tree(rng: random.Random, depth: int, ids: Sequence[VarId] = (X,)) -> SymExpr:
    """A random tree of depth at most ``depth`` over ``ids``, 0 and 1."""
    if depth <= 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.7:
            return Leaf(rng.choice(ids))
        return Zero if r < 0.8 else One
    op = ADD if rng.random() < 0.5 else MUL
    return Node(op, random_tree(rng, depth - 1, ids), random_tree(rng, depth - 1, ids))


def random_context(rng: random.Random, leaves: Sequence[VarId], size: int,
                   fresh: Iterable[VarId]) -> list[Binding]:
    """A well-formed context: each binding defines a fresh id from ``fresh``
    and uses operands that are leaves or previously defined ids."""
    known = list(leaves)
    out = []
    names = iter(fresh)
    for _ in range(size):
        u = next(names)
        out.append(Binding(u, rng.choice((ADD, MUL)), rng.choice(known), rng.choice(known)))
        known.append(u)
    return out
