from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from qtoda.exactalg import VarSet
from qtoda.invariants import weight_vars
from qtoda.rootsys import build_root_system
from qtoda.toda import (NOElement, RankMismatch, TodaSolveError, build_Omega, commutator_uenv, fk_vars,
                        mu_projection, no_mul, poisson_bracket, solve_Omega_k, split_F_f, F_at_zero_Q)

from conftest import context
from oracle import act_no, generic, xs

lam1 = NOElement.lam(1, 0)
X1 = NOElement.X(1, 0)


def test_lambda_times_x():
    assert no_mul(lam1, X1) == NOElement(1, {((1,), (1,)): 1, ((1,), (0,)): 1})


def test_lambda_squared_times_x():
    assert no_mul(no_mul(lam1, lam1), X1) == NOElement(1, {((1,), (2,)): 1, ((1,), (1,)): 2, ((1,), (0,)): 1})


def test_x_times_lambda_already_normal():
    assert no_mul(X1, lam1) == NOElement(1, {((1,), (1,)): 1})


def test_commutators():
    assert commutator_uenv(lam1, X1) == X1
    l1, l2 = NOElement.lam(2, 0), NOElement.lam(2, 1)
    assert commutator_uenv(l1, l2).is_zero()
    assert commutator_uenv(NOElement.X(1, 0, 2), lam1) == NOElement.X(1, 0, 2).scale(-2)


def test_mu_projection():
    el = NOElement(2, {((2, 0), (0, 1)): 1, ((0, 0), (1, 1)): 1})
    vs = weight_vars(2)
    assert mu_projection(el) == vs.var(0) * vs.var(1)
    assert mu_projection(NOElement.X(2, 0, 3)).is_zero()
    lam = weight_vars(1).var(0)
    assert mu_projection(build_Omega(build_root_system("A", 1))) == (lam ** 2).scale(2)


def test_build_omega():
    assert build_Omega(build_root_system("A", 1)) == NOElement(1, {((0,), (2,)): 2, ((2,), (0,)): 1})
    om = build_Omega(build_root_system("A", 2))
    expect = {((0, 0), (2, 0)): 2, ((0, 0), (1, 1)): -2, ((0, 0), (0, 2)): 2, ((2, 0), (0, 0)): 1, ((0, 2), (0, 0)): 1}
    assert om == NOElement(2, expect)


def test_rank_mismatch():
    with pytest.raises(RankMismatch):
        NOElement.lam(1, 0) + NOElement.lam(2, 0)


@st.composite
def elements(draw, rank=2):
    keys = st.tuples(st.tuples(*[st.integers(0, 2)] * rank), st.tuples(*[st.integers(0, 2)] * rank))
    terms = draw(st.dictionaries(keys, st.integers(-3, 3), max_size=3))
    return NOElement(rank, terms)


@settings(max_examples=40, deadline=None)
@given(elements(), elements(), elements())
def test_no_mul_associative(a, b, c):
    assert no_mul(no_mul(a, b), c) == no_mul(a, no_mul(b, c))


@settings(max_examples=15, deadline=None)
@given(elements(), elements())
def test_no_mul_matches_operator_model(a, b):
    x = xs(2)
    f = generic(x)
    lhs = act_no(no_mul(a, b), f, x)
    rhs = act_no(a, act_no(b, f, x), x)
    assert sp.simplify(sp.expand(lhs - rhs)) == 0


def test_a1_integrals():
    ctx = context("A", 1)
    (t,) = ctx.integrals
    assert t.omega == build_Omega(ctx.rs)
    vs = fk_vars(1)
    Q, L = vs.gens()
    assert t.F == (L ** 2).scale(2) + Q
    assert t.f.is_zero()


def test_a2_cubic_commutes_in_operator_model():
    ctx = context("A", 2)
    om2 = ctx.integrals[1].omega
    x = xs(2)
    f = generic(x)
    omega = build_Omega(ctx.rs)
    res = act_no(om2, act_no(omega, f, x), x) - act_no(omega, act_no(om2, f, x), x)
    assert sp.expand(res) == 0
    assert mu_projection(om2) == ctx.invariants[1]
    assert om2.filtration_degree() == 3


def test_a2_cubic_split():
    ctx = context("A", 2)
    t = ctx.integrals[1]
    l = 2
    assert all(any(e[:l]) for e in t.f.terms)
    assert poisson_bracket(t.F, ctx.integrals[0].F).is_zero()
    assert F_at_zero_Q(t.F) == ctx.invariants[1]


@pytest.mark.parametrize("letter,rank", [("A", 2), ("B", 2), ("G", 2), ("A", 3)])
def test_pairwise_commuting(letter, rank):
    tis = context(letter, rank).integrals
    for a in tis:
        for b in tis:
            assert commutator_uenv(a.omega, b.omega).is_zero()
        assert a.omega.is_even_x()


def test_poisson_bracket_basic():
    vs = fk_vars(1)
    Q, L = vs.gens()
    assert poisson_bracket(L, Q) == Q.scale(2)
    F = (L ** 2).scale(2) + Q
    assert poisson_bracket(F, F).is_zero()


def test_split_rejects_pure_lambda_remainder():
    el = NOElement(1, {((2,), (0,)): 1, ((0,), (2,)): 2, ((0,), (1,)): 5})
    with pytest.raises(TodaSolveError):
        split_F_f(el, 2)


def test_solve_rejects_non_invariant():
    rs = build_root_system("A", 2)
    vs = weight_vars(2)
    with pytest.raises(TodaSolveError):
        solve_Omega_k(rs, vs.var(0) ** 3, 3)


def test_json_roundtrip():
    om = context("B", 2).integrals[1].omega
    assert NOElement.from_json(om.to_json()) == om
