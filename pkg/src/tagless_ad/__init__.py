"""Define-by-run automatic differentiation over tagless-final expressions.

Three interchangeable ``diff`` implementations share one API:

* :func:`diff_forward` -- dual numbers,
* :func:`diff_tape` -- reverse mode with an explicit tape,
* :func:`diff_handler` -- reverse mode driven by effect handlers.

Each maps an :class:`Expression` to the :class:`Expression` of its
derivative, and can be iterated.
"""
from .ad_forward import Dual, diff_forward, dual_ops
from .ad_handler import diff_handler, protocol_audit
from .ad_tape import backward_trace, diff_tape
from .errors import (
    ContinuationAlreadyResumed, ContractViolation, EffectError, InvariantViolation, UnhandledEffect,
)
from .expr import Expression, cube, evaluate, from_ast, monomial, reify, variable
from .semiring import FLOAT, NAT, POLY, Poly, SemiringOps, axioms_hold, float_semiring, nat_embed
from .symbolic import derivative, equiv_free, partial_derivative, render

__all__ = [
    "ContinuationAlreadyResumed", "ContractViolation", "Dual", "EffectError", "Expression",
    "FLOAT", "InvariantViolation", "NAT", "POLY", "Poly", "SemiringOps", "UnhandledEffect",
    "axioms_hold", "backward_trace", "cube", "derivative", "diff_forward", "diff_handler",
    "diff_tape", "dual_ops", "equiv_free", "evaluate", "float_semiring", "from_ast", "monomial",
    "nat_embed", "partial_derivative", "protocol_audit", "reify", "render", "variable",
]
