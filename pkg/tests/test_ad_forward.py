import pytest

from tagless_ad.ad_forward import Dual, diff_forward, dual_ops
from tagless_ad.expr import corpus, cube, from_ast, monomial, reify
from tagless_ad.semiring import FLOAT, NAT, axioms_hold
from tagless_ad.symbolic import MUL, X, Env, Leaf, Node, derivative, eval_env

DN = dual_ops(NAT)


def test_dual_mul():
    assert DN.mul(Dual(2, 1), Dual(3, 0)) == Dual(6, 3)


def test_dual_neutral_elements():
    a = Dual(4, 9)
    assert DN.mul(DN.one, a) == a
    assert DN.add(DN.zero, a) == a
    assert DN.zero == Dual(0, 0) and DN.one == Dual(1, 0)


def test_dual_equiv_is_pointwise():
    DF = dual_ops(FLOAT)
    assert DF.equiv(Dual(1.0, 2.0), Dual(1.0 + 1e-12, 2.0))
    assert not DF.equiv(Dual(1.0, 2.0), Dual(1.0, 2.1))


def test_dual_axioms_preserved():
    lifted = [Dual(a, b) for a in (0, 1, 2) for b in (0, 1, 4)]
    assert axioms_hold(NAT, [0, 1, 2, 4])
    assert axioms_hold(DN, lifted)


def test_cube_derivative_is_75():
    assert diff_forward(cube()).evaluate(FLOAT, 4.0) == 75.0


@pytest.mark.parametrize("r", [0, 3, 11])
def test_derivative_of_variable_is_one(r):
    assert diff_forward(monomial(1)).evaluate(NAT, r) == 1


def test_square():
    assert diff_forward(from_ast(Node(MUL, Leaf(X), Leaf(X)))).evaluate(NAT, 3) == 6


def test_second_derivative():
    assert diff_forward(diff_forward(cube())).evaluate(NAT, 4) == 30
    assert diff_forward(diff_forward(cube())).evaluate(FLOAT, 4.0) == 30.0


@pytest.mark.parametrize("e", list(corpus()), ids=lambda e: e.name)
def test_agrees_with_symbolic_derivative(e):
    d = derivative(reify(e))
    for ops, points in ((NAT, [0, 1, 2, 3]), (FLOAT, [0.25, -1.5, 2.0])):
        for r in points:
            assert ops.equiv(diff_forward(e).evaluate(ops, r), eval_env(d, ops, Env({X: r})))
