"""Deep effect handlers with one-shot continuations.

Effects are nameless: ``perform`` always reaches the nearest enclosing
``handle``, whatever the payload.  A handled computation runs on its own
greenlet; ``perform`` switches back to whichever context last started or
resumed it, and the handler's effect branch runs there.  Resuming the
continuation switches into the computation again, so the effect branch's
code after ``resume`` runs only once the rest of the computation (and
every later handler instance) has finished.

Each effect branch activation nests inside the previous one's ``resume``
call, so the Python stack grows by a few frames per handled effect.
"""
from __future__ import annotations

import contextlib
import sys
from dataclasses import dataclass
from typing import Any, Callable, Generic, TypeVar

from greenlet import greenlet, getcurrent

from .errors import ContinuationAlreadyResumed, UnhandledEffect

R = TypeVar("R")

# Extra recursion headroom granted while a handler runs.
RECURSION_HEADROOM = 20_000


@dataclass(frozen=True)
class AddReq:
    a: Any
    b: Any


@dataclass(frozen=True)
class MulReq:
    a: Any
    b: Any


@dataclass
class Handler(Generic[R]):
    on_effect: Callable[[Any, "Continuation"], R]
    on_return: Callable[[Any], R]


class _Performed:
    __slots__ = ("payload",)

    def __init__(self, payload):
        self.payload = payload


class _Returned:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


class _Computation(greenlet):
    def __init__(self, body: Callable[[], Any], handler: Handler):
        super().__init__(run=lambda *_: _Returned(body()))
        self.handler = handler
        self.waiter: greenlet | None = None


class Continuation:
    """The suspended rest of a handled computation; resumable once."""

    __slots__ = ("_comp", "consumed")

    def __init__(self, comp: _Computation):
        self._comp = comp
        self.consumed = False

    def __repr__(self) -> str:
        return f"<Continuation consumed={self.consumed}>"


def _drive(comp: _Computation, value: Any) -> Any:
    here = getcurrent()
    comp.waiter = here
    comp.parent = here  # exceptions and the final return land here
    msg = comp.switch(value)
    if isinstance(msg, _Returned):
        return comp.handler.on_return(msg.value)
    return comp.handler.on_effect(msg.payload, Continuation(comp))


@contextlib.contextmanager
def _headroom():
    old = sys.getrecursionlimit()
    want = max(old, 1000) + RECURSION_HEADROOM
    if want > old:
        sys.setrecursionlimit(want)
    try:
        yield
    finally:
        if sys.getrecursionlimit() == want:
            sys.setrecursionlimit(old)


def handle(computation: Callable[[], Any], handler: Handler[R]) -> R:
    """Run ``computation()`` under ``handler`` (deep semantics)."""
    with _headroom():
        return _drive(_Computation(computation, handler), None)


def perform(payload: Any) -> Any:
    """Suspend the current computation and hand ``payload`` to the nearest handler."""
    cur = getcurrent()
    if not isinstance(cur, _Computation):
        raise UnhandledEffect(f"unhandled effect: {payload!r}")
    return cur.waiter.switch(_Performed(payload))


def resume(k: Continuation, reply: Any) -> Any:
    """Continue the computation suspended in ``k`` as if ``perform`` returned ``reply``."""
    if k.consumed:
        raise ContinuationAlreadyResumed("continuation resumed twice")
    k.consumed = True
    return _drive(k._comp, reply)


# -- the ask demo ------------------------------------------------------------

@dataclass(frozen=True)
class Ask:
    x: int


def ask(x: int) -> int:
    return perform(Ask(x))


def ask_demo() -> list[str]:
    """Handle ``ask 2 + ask 7`` (right operand first) with a handler that
    answers ``x + 1`` and logs before and after resuming."""
    out: list[str] = []

    def client():
        b = ask(7)
        a = ask(2)
        return a + b

    def on_effect(p: Ask, k: Continuation):
        out.append(f"I am queried at {p.x}...")
        res = resume(k, p.x + 1)
        out.append(f"Earlier, I have been queried at {p.x}...")
        return res

    def on_return(result):
        out.append(f"The client has finished with result {result}")
        return result

    handle(client, Handler(on_effect, on_return))
    return out
