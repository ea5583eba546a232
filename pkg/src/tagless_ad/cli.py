"""Command-line front end.

    tagless-ad --backend handler --at 4 "(x+1)*(x+1)*(x+1)"
    tagless-ad --backend symbolic --emit-symbolic "x*x"
    tagless-ad --check --at 3 "x^5 + x"
    tagless-ad --demo-ask

Exit codes: 0 success, 1 bad input, 2 a cross-check failed, 3 an internal
contract (one-shot rule, debug invariant) was violated.
"""
from __future__ import annotations

import argparse
import itertools
import sys
from dataclasses import dataclass
from typing import Callable, Optional, TextIO

from .ad_forward import diff_forward
from .ad_handler import backward_trace as handler_trace
from .ad_handler import diff_handler
from .ad_tape import backward_trace as tape_trace
from .ad_tape import diff_tape, format_trace
from .effects import ask_demo
from .errors import ContractViolation
from .expr import Expression, from_ast, monomial
from .semiring import FLOAT, nat_embed
from .symbolic import ADD, MUL, TREES, X, Env, Leaf, Node, SymExpr, derivative, eval_env, render

BACKENDS = ("forward", "tape", "handler", "symbolic")

EXIT_OK, EXIT_INPUT, EXIT_CHECK, EXIT_CONTRACT = 0, 1, 2, 3


class ParseError(ValueError):
    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} at byte offset {offset}")
        self.offset = offset


class _Parser:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, len(self.src[:self.pos].encode("utf-8")))

    def skip(self) -> None:
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def nat(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos] in "0123456789":
            self.pos += 1
        if start == self.pos:
            raise self.error("expected a natural number")
        return int(self.src[start:self.pos])

    def expr(self) -> SymExpr:
        e = self.term()
        while self.peek() == "+":
            self.pos += 1
            e = Node(ADD, e, self.term())
        return e

    def term(self) -> SymExpr:
        e = self.factor()
        while self.peek() == "*":
            self.pos += 1
            e = Node(MUL, e, self.factor())
        return e

    def factor(self) -> SymExpr:
        e = self.atom()
        if self.peek() == "^":
            self.pos += 1
            if not self.peek().isdigit():
                raise self.error("exponent must be a natural-number literal")
            e = monomial(self.nat()).evaluate(TREES, e)
        return e

    def atom(self) -> SymExpr:
        c = self.peek()
        if c == "x":
            self.pos += 1
            return Leaf(X)
        if c.isdigit():
            return nat_embed(TREES, self.nat())
        if c == "(":
            self.pos += 1
            e = self.expr()
            if self.peek() != ")":
                raise self.error("expected ')'")
            self.pos += 1
            return e
        raise self.error(f"unexpected {c!r}" if c else "unexpected end of input")


def parse(source: str) -> SymExpr:
    """Parse ``x``, natural literals, ``+``, ``*``, ``^NAT`` and parentheses."""
    p = _Parser(source)
    e = p.expr()
    if p.peek():
        raise p.error(f"unexpected {p.peek()!r}")
    return e


def format_number(v: float) -> str:
    """Shortest round-trip text, without a trailing ``.0``."""
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


@dataclass
class CliRequest:
    source: Optional[str] = None
    backend: str = "handler"
    at: Optional[float] = None
    order: int = 1
    emit_symbolic: bool = False
    check: bool = False
    demo_ask: bool = False
    trace: bool = False


_DIFF: dict[str, Callable[..., Expression]] = {
    "forward": lambda e, check=False: diff_forward(e),
    "tape": lambda e, check=False: diff_tape(e, check_invariants=check),
    "handler": lambda e, check=False: diff_handler(e, check_invariants=check),
}


def iterate(backend: str, e: Expression, order: int, check: bool = False) -> Expression:
    """``order``-fold application of a diff backend; invariants are checked
    on the outermost application only."""
    for i in range(order):
        e = _DIFF[backend](e, check=check and i == order - 1)
    return e


def symbolic_derivative(tree: SymExpr, order: int) -> SymExpr:
    for _ in range(order):
        tree = derivative(tree)
    return tree


def value_at(backend: str, tree: SymExpr, order: int, at: float, check: bool = False) -> float:
    if backend == "symbolic":
        return eval_env(symbolic_derivative(tree, order), FLOAT, Env({X: at}))
    return iterate(backend, from_ast(tree), order, check).evaluate(FLOAT, at)


def run(req: CliRequest, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    if req.demo_ask:
        for line in ask_demo():
            out.write(line + "\n")
        return EXIT_OK
    if req.source is None:
        err.write("error: an expression is required\n")
        return EXIT_INPUT
    if req.backend not in BACKENDS:
        err.write(f"error: unknown backend {req.backend!r}\n")
        return EXIT_INPUT
    if req.order < 0:
        err.write("error: --order must be non-negative\n")
        return EXIT_INPUT
    try:
        tree = parse(req.source)
    except ParseError as exc:
        err.write(f"parse error: {exc}\n")
        return EXIT_INPUT

    if req.emit_symbolic:
        out.write(render(symbolic_derivative(tree, req.order)) + "\n")
        if req.at is None:
            return EXIT_OK
    if req.at is None:
        err.write("error: --at is required unless --emit-symbolic or --demo-ask is given\n")
        return EXIT_INPUT

    try:
        if req.trace:
            inner = iterate(req.backend if req.backend != "symbolic" else "tape",
                            from_ast(tree), req.order - 1) if req.order >= 1 else None
            if inner is None:
                err.write("error: --trace needs --order >= 1\n")
                return EXIT_INPUT
            tracer = handler_trace if req.backend == "handler" else tape_trace
            out.write(format_trace(tracer(inner, FLOAT, req.at), fmt=format_number))
            return EXIT_OK
        if req.check:
            return _check(tree, req, out)
        out.write(format_number(value_at(req.backend, tree, req.order, req.at)) + "\n")
        return EXIT_OK
    except ContractViolation as exc:
        err.write(f"contract violation: {exc}\n")
        return EXIT_CONTRACT


def _check(tree: SymExpr, req: CliRequest, out: TextIO) -> int:
    values = {b: value_at(b, tree, req.order, req.at, check=True) for b in BACKENDS}
    ok = True
    for a, b in itertools.combinations(BACKENDS, 2):
        same = FLOAT.equiv(values[a], values[b])
        ok &= same
        out.write(f"{'PASS' if same else 'FAIL'} {a} vs {b}: "
                  f"{format_number(values[a])} {'==' if same else '!='} {format_number(values[b])}\n")
    return EXIT_OK if ok else EXIT_CHECK


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="tagless-ad", description="Differentiate a univariate semiring expression.")
    p.add_argument("source", nargs="?", help="expression over x, natural literals, +, * and ^NAT")
    p.add_argument("--backend", choices=BACKENDS, default="handler")
    p.add_argument("--at", type=float, help="point at which to evaluate the derivative")
    p.add_argument("--order", type=int, default=1, help="how many times to differentiate (default 1)")
    p.add_argument("--emit-symbolic", action="store_true", help="print the unsimplified symbolic derivative")
    p.add_argument("--check", action="store_true", help="cross-check every backend against the others")
    p.add_argument("--trace", action="store_true", help="print the backward-phase adjoint snapshots")
    p.add_argument("--demo-ask", action="store_true", help="run the effect-handler demo")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    req = CliRequest(
        source=args.source, backend=args.backend, at=args.at, order=args.order,
        emit_symbolic=args.emit_symbolic, check=args.check, demo_ask=args.demo_ask,
        trace=args.trace,
    )
    return run(req)


if __name__ == "__main__":
    sys.exit(main())
