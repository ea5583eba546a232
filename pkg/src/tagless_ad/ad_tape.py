"""Reverse-mode differentiation with an explicit tape (Wengert list).

The forward phase evaluates the expression under a vertex dictionary whose
``add``/``mul`` allocate a fresh vertex and push a binding on the tape.  The
backward phase seeds the root and pops bindings, pushing each vertex's
adjoint to its operands.

Debug instrumentation (``check_invariants=True``) keeps a ghost copy of the
tape as a :class:`~tagless_ad.symbolic.Binding` context and, after every
step, compares each vertex's ``v``/``d`` field against the symbolic oracle.
It is O(n^2) per step and meant for tests.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .errors import InvariantViolation
from .expr import Expression, reify
from .semiring import SemiringOps
from .symbolic import (
    ADD, MUL, X, Binding, Env, Leaf, Node, One, Op, SymExpr, Zero,
    derivative, eval_env, extend_env, fill, fill_all, partial_derivative, substitute, vars,
)

ZERO_ID, ONE_ID = "O", "I"
RETIRED = "#"


def debug_default() -> bool:
    return os.environ.get("TAGLESS_AD_DEBUG", "") not in ("", "0")


# -- vertices ----------------------------------------------------------------

class Vertex:
    __slots__ = ()


class _Const(Vertex):
    __slots__ = ("id",)

    def __init__(self, id_: str):
        self.id = id_

    def __repr__(self) -> str:
        return self.id


ZERO_V = _Const(ZERO_ID)
ONE_V = _Const(ONE_ID)


class Var(Vertex):
    """A heap vertex: ``v`` is written once, ``d`` accumulates the adjoint."""

    __slots__ = ("v", "d", "id")

    def __init__(self, v: Any, d: Any, id_: str):
        self.v = v
        self.d = d
        self.id = id_

    def __repr__(self) -> str:
        return f"Var({self.id}, v={self.v!r}, d={self.d!r})"


def get_v(x: Vertex, base: SemiringOps[Any]) -> Any:
    if x is ZERO_V:
        return base.zero
    if x is ONE_V:
        return base.one
    return x.v


def update(x: Vertex, i: Any, base: SemiringOps[Any]) -> None:
    """Add ``i`` to the ``d`` field of ``x``; no-op on the constants."""
    if isinstance(x, Var):
        x.d = base.add(x.d, i)


class _Store:
    """Allocates vertices for one differentiation run, naming them x, u1, u2, ..."""

    def __init__(self, base: SemiringOps[Any]):
        self.base = base
        self.vertices: list[Var] = []

    def new(self, v: Any) -> Var:
        id_ = X if not self.vertices else f"u{len(self.vertices)}"
        u = Var(v, self.base.zero, id_)
        self.vertices.append(u)
        return u


def vertex_ops(base: SemiringOps[Any], add: Callable, mul: Callable) -> SemiringOps[Vertex]:
    return SemiringOps(
        ZERO_V, ONE_V, add, mul,
        lambda a, b: base.equiv(get_v(a, base), get_v(b, base)),
        name=f"vertex({base.name})",
    )


def backward_step(op: Op, u: Var, a: Vertex, b: Vertex, base: SemiringOps[Any]) -> None:
    du = u.d
    if op is ADD:
        update(a, du, base)
        update(b, du, base)
    else:
        update(a, base.mul(du, get_v(b, base)), base)
        update(b, base.mul(du, get_v(a, base)), base)


# -- ghost instrumentation ---------------------------------------------------

_TO_UNIVARIATE = {ZERO_ID: Zero, ONE_ID: One, X: Leaf(X)}


@dataclass(frozen=True)
class OpProtocolWitness:
    """One performed operation as seen by the protocol audit."""

    op: Op
    operands: tuple[str, str]
    request_exprs: tuple[SymExpr, SymExpr]
    reply_vertex: str
    reply_expr: SymExpr

    @property
    def holds(self) -> bool:
        return self.reply_expr == Node(self.op, *self.request_exprs)


class Monitor:
    """Ghost state mirroring a reverse-mode run.

    ``pushed`` is called after each vertex is created, ``seeded`` after the
    root's adjoint is set, and ``processed`` after each vertex has pushed
    its adjoint to its operands.
    """

    def __init__(self, base: SemiringOps[Any], r: Any, store: _Store, *,
                 check: bool = False, trace: bool = False, audit: bool = False,
                 expected_dx: Any = None):
        self.base = base
        self.store = store
        self.check = check
        self.trace = trace
        self.audit = audit
        self.expected_dx = expected_dx
        self.rho0 = Env({ZERO_ID: base.zero, ONE_ID: base.one, X: r})
        self.context: list[Binding] = []
        self.pending = 0
        self.root: Optional[str] = None
        self.retired: set[str] = set()
        self.snapshots: list[dict[str, Any]] = []
        self.witnesses: list[OpProtocolWitness] = []

    def _fail(self, msg: str) -> None:
        raise InvariantViolation(msg)

    def pushed(self, u: Var, op: Op, a: Vertex, b: Vertex) -> None:
        self.context.append(Binding(u.id, op, a.id, b.id))
        if self.audit:
            to_x = lambda i: _TO_UNIVARIATE[i]  # noqa: E731
            req = (substitute(fill(self.context[:-1], a.id), to_x),
                   substitute(fill(self.context[:-1], b.id), to_x))
            self.witnesses.append(OpProtocolWitness(
                op, (a.id, b.id), req, u.id, substitute(fill(self.context, u.id), to_x)))
        if self.check:
            self._check_forward()

    def _check_forward(self) -> None:
        trees = fill_all(self.context)
        memo: dict[int, Any] = {}
        for w in self.store.vertices:
            t = trees.get(w.id, Leaf(w.id))
            if not vars(t) <= {ZERO_ID, ONE_ID, X}:
                self._fail(f"forward invariant: {w.id} depends on unknown ids {vars(t)}")
            want = eval_env(t, self.base, self.rho0, memo)
            if not self.base.equiv(w.v, want):
                self._fail(f"forward invariant: {w.id}.v = {w.v!r}, expected {want!r}")

    def seeded(self, y: Vertex) -> None:
        self.root = y.id
        self.pending = len(self.context)
        if self.check and self.expected_dx is not None:
            got = eval_env(partial_derivative(fill(self.context, self.root), X), self.base, self.rho0)
            if not self.base.equiv(got, self.expected_dx):
                self._fail(f"backward invariant: recorded context has derivative {got!r}, "
                           f"expected {self.expected_dx!r}")
        self._after_backward_step()

    def processed(self, u: Var) -> None:
        if self.pending == 0 or self.context[self.pending - 1].u != u.id:
            self._fail(f"backward phase: {u.id} processed out of order")
        self.pending -= 1
        self.retired.add(u.id)
        self._after_backward_step()

    def _after_backward_step(self) -> None:
        if self.check:
            k1, k2 = self.context[:self.pending], self.context[self.pending:]
            env1 = extend_env(self.rho0, k1, self.base)
            t = fill(k2, self.root)
            occurring = vars(t)
            for w in self.store.vertices:
                if w.id in self.retired:
                    continue
                if w.id in occurring:
                    want = eval_env(partial_derivative(t, w.id), self.base, env1)
                else:
                    want = self.base.zero  # t does not mention w
                if not self.base.equiv(w.d, want):
                    self._fail(f"backward invariant: {w.id}.d = {w.d!r}, expected {want!r}")
        if self.trace:
            self.snapshots.append({
                w.id: RETIRED if w.id in self.retired else w.d for w in self.store.vertices
            })


def format_trace(snapshots: list[dict[str, Any]], fmt: Callable[[Any], str] = str) -> str:
    """One line per snapshot, ``id=value`` comma-separated, retired ids as ``id=#``."""
    lines = []
    for snap in snapshots:
        lines.append(",".join(f"{k}={v if v == RETIRED else fmt(v)}" for k, v in snap.items()))
    return "\n".join(lines) + ("\n" if lines else "")


# -- the tape algorithm ------------------------------------------------------

def run_tape(e: Expression, base: SemiringOps[Any], r: Any, *,
             check: bool = False, trace: bool = False, audit: bool = False) -> tuple[Any, Monitor]:
    store = _Store(base)
    expected = None
    if check:
        expected = eval_env(derivative(reify(e)), base, Env({X: r}))
    mon = Monitor(base, r, store, check=check, trace=trace, audit=audit, expected_dx=expected)
    watching = check or trace or audit
    tape: list[tuple[Op, Var, Vertex, Vertex]] = []

    def record(op: Op, a: Vertex, b: Vertex) -> Var:
        va, vb = get_v(a, base), get_v(b, base)
        u = store.new(base.add(va, vb) if op is ADD else base.mul(va, vb))
        tape.append((op, u, a, b))
        if watching:
            mon.pushed(u, op, a, b)
        return u

    ops = vertex_ops(base, lambda a, b: record(ADD, a, b), lambda a, b: record(MUL, a, b))
    x = store.new(r)
    y = e.evaluate(ops, x)

    update(y, base.one, base)
    if watching:
        mon.seeded(y)
    while tape:
        op, u, a, b = tape.pop()
        backward_step(op, u, a, b, base)
        if watching:
            mon.processed(u)
    return x.d, mon


def diff_tape(e: Expression, *, check_invariants: Optional[bool] = None) -> Expression:
    check = debug_default() if check_invariants is None else check_invariants

    def fn(ops: SemiringOps[Any], r: Any) -> Any:
        return run_tape(e, ops, r, check=check)[0]

    return Expression(fn, name=f"diff_tape({e.name})")


def backward_trace(e: Expression, ops: SemiringOps[Any], r: Any) -> list[dict[str, Any]]:
    """Snapshots of every vertex's ``d`` field: after seeding the root, then
    after each vertex is processed.  Processed vertices read ``#``."""
    return run_tape(e, ops, r, trace=True)[1].snapshots


def tape_length(e: Expression, ops: SemiringOps[Any], r: Any) -> int:
    """Bindings recorded by the forward phase."""
    return len(run_tape(e, ops, r, trace=True)[1].context)
