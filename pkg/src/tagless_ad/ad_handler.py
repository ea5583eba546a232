"""Reverse-mode differentiation with effect handlers.

``add`` and ``mul`` perform an effect instead of computing.  The handler
allocates the result vertex, resumes the expression, and only once the
expression (and so every later operation) has finished does it push the
vertex's adjoint to its operands.  The suspended handler activations play
the part of the tape; no explicit loop is needed.
"""
from __future__ import annotations

from typing import Any, Optional

from .ad_tape import (
    Monitor, OpProtocolWitness, Vertex, _Store, backward_step, debug_default, get_v, update,
    vertex_ops,
)
from .effects import AddReq, Continuation, Handler, MulReq, handle, perform, resume
from .errors import InvariantViolation, UnhandledEffect
from .expr import Expression, reify
from .semiring import NAT, SemiringOps
from .symbolic import ADD, MUL, X, Env, derivative, eval_env


def _perform_add(a: Vertex, b: Vertex) -> Vertex:
    return perform(AddReq(a, b))


def _perform_mul(a: Vertex, b: Vertex) -> Vertex:
    return perform(MulReq(a, b))


def run_handler(e: Expression, base: SemiringOps[Any], r: Any, *,
                check: bool = False, trace: bool = False, audit: bool = False) -> tuple[Any, Monitor]:
    store = _Store(base)
    expected = None
    if check:
        expected = eval_env(derivative(reify(e)), base, Env({X: r}))
    mon = Monitor(base, r, store, check=check, trace=trace, audit=audit, expected_dx=expected)
    watching = check or trace or audit
    continuations: list[Continuation] = []

    def on_effect(p: Any, k: Continuation) -> None:
        if isinstance(p, AddReq):
            op = ADD
        elif isinstance(p, MulReq):
            op = MUL
        else:
            raise UnhandledEffect(f"differentiated expression performed a foreign effect: {p!r}")
        a, b = p.a, p.b
        va, vb = get_v(a, base), get_v(b, base)
        u = store.new(base.add(va, vb) if op is ADD else base.mul(va, vb))
        if watching:
            mon.pushed(u, op, a, b)
            continuations.append(k)
        resume(k, u)
        backward_step(op, u, a, b, base)
        if watching:
            mon.processed(u)

    def on_return(y: Vertex) -> None:
        update(y, base.one, base)
        if watching:
            mon.seeded(y)

    ops = vertex_ops(base, _perform_add, _perform_mul)
    x = store.new(r)
    handle(lambda: e.evaluate(ops, x), Handler(on_effect, on_return))
    if check and not all(k.consumed for k in continuations):
        raise InvariantViolation("a continuation was never resumed")
    return x.d, mon


def diff_handler(e: Expression, *, check_invariants: Optional[bool] = None) -> Expression:
    check = debug_default() if check_invariants is None else check_invariants

    def fn(ops: SemiringOps[Any], r: Any) -> Any:
        return run_handler(e, ops, r, check=check)[0]

    return Expression(fn, name=f"diff_handler({e.name})")


def backward_trace(e: Expression, ops: SemiringOps[Any], r: Any) -> list[dict[str, Any]]:
    """Same snapshots as :func:`tagless_ad.ad_tape.backward_trace`, taken
    as the suspended handler activations unwind."""
    return run_handler(e, ops, r, trace=True)[1].snapshots


def protocol_audit(e: Expression, r: Any = 1, ops: SemiringOps[Any] = NAT) -> list[OpProtocolWitness]:
    """One witness per performed operation, relating each reply vertex to
    the expressions its operands stand for."""
    return run_handler(e, ops, r, audit=True)[1].witnesses
