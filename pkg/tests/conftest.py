import pathlib

import pytest
from hypothesis import settings, strategies as st

from tagless_ad.symbolic import ADD, MUL, X, Leaf, Node, One, Zero

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

GOLDEN = pathlib.Path(__file__).parent / "golden"


def trees(ids=(X,), max_leaves=24):
    """Hypothesis strategy for SymExpr trees over ``ids``, 0 and 1."""
    leaves = st.one_of(st.sampled_from([Leaf(i) for i in ids]), st.just(Zero), st.just(One))
    return st.recursive(
        leaves,
        lambda sub: st.builds(Node, st.sampled_from([ADD, MUL]), sub, sub),
        max_leaves=max_leaves,
    )


@pytest.fixture
def golden():
    return GOLDEN
