from math import prod

import pytest

from qtoda.exactalg import VarSet
from qtoda.invariants import (fundamental_degrees, invariant_dimensions, is_invariant, jacobian_determinant,
                              quadratic_invariant, reynolds, weight_vars)
from qtoda.rootsys import SUPPORTED, build_root_system, weyl_generate

from conftest import context

ALL_TYPES = [(k, r) for k, ranks in SUPPORTED.items() for r in ranks]

DEGREES = {
    ("A", 1): [2], ("A", 2): [2, 3], ("A", 3): [2, 3, 4], ("A", 4): [2, 3, 4, 5],
    ("B", 2): [2, 4], ("B", 3): [2, 4, 6], ("C", 2): [2, 4], ("C", 3): [2, 4, 6],
    ("D", 4): [2, 4, 4, 6], ("G", 2): [2, 6],
}


@pytest.mark.parametrize("letter,rank", ALL_TYPES)
def test_fundamental_degrees(letter, rank):
    rs = build_root_system(letter, rank)
    W = weyl_generate(rs)
    d = fundamental_degrees(rs, W)
    assert d == DEGREES[(letter, rank)]
    assert prod(d) == W.order
    assert sum(x - 1 for x in d) == rs.n_positive


def test_invariant_dimensions_a2():
    W = weyl_generate(build_root_system("A", 2))
    # invariants of S3 in degrees 0..4: 1, 0, 1, 1, 1
    assert invariant_dimensions(W, 4) == [1, 0, 1, 1, 1]


def test_reynolds_a1():
    W = weyl_generate(build_root_system("A", 1))
    vs = weight_vars(1)
    lam = vs.var(0)
    assert reynolds(lam ** 2, W) == lam ** 2
    assert reynolds(lam, W).is_zero()


def test_reynolds_idempotent():
    ctx = context("B", 2)
    for u in ctx.invariants:
        assert reynolds(u, ctx.W) == u


def test_quadratic_invariants():
    l = weight_vars(1).var(0)
    assert quadratic_invariant(build_root_system("A", 1)) == (l ** 2).scale(2)
    vs = weight_vars(2)
    a, b = vs.gens()
    assert quadratic_invariant(build_root_system("A", 2)) == (a * a - a * b + b * b).scale(2)


@pytest.mark.parametrize("letter,rank", [("A", 2), ("A", 3), ("B", 2), ("G", 2), ("C", 3), ("D", 4)])
def test_generators(letter, rank):
    ctx = context(letter, rank)
    inv = ctx.invariants
    for u, d in zip(inv, inv.degrees):
        assert is_invariant(u, ctx.W)
        assert u.is_homogeneous() and u.degree() == d
    jac = jacobian_determinant(list(inv))
    assert not jac.is_zero()
    assert jac.degree() == ctx.rs.n_positive


def test_a2_cubic_generator_is_antisymmetric_under_swap():
    # the diagram automorphism l1 <-> l2 maps the A2 cubic to its negative
    ctx = context("A", 2)
    u2 = ctx.invariants[1]
    vs = u2.vs
    swapped = u2.substitute({0: vs.var(1), 1: vs.var(0)})
    assert swapped == -u2
