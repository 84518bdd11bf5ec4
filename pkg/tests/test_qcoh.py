from fractions import Fraction
from math import factorial, prod

import pytest

from qtoda.exactalg import SparsePoly
from qtoda.qcoh import (QMatrix, SchubertBasis, borel_check, check_divisor, check_nilpotent,
                        check_quadratic_identity, divisor_matrices, dual_operators, pairing_data,
                        q_vars, relation_polynomial, relation_vars, verify_hypotheses, verify_relations)

from conftest import context

TYPES = [("A", 1), ("A", 2), ("A", 3), ("B", 2), ("G", 2)]


def _e(ctx):
    vs = ctx.Bs[0].vs
    v = [vs.zero() for _ in range(len(ctx.basis))]
    v[ctx.basis.identity_position] = vs.one()
    return v


def test_a1_matrices():
    ctx = context("A", 1)
    vs = q_vars(1)
    q = vs.var(0)
    # basis order [s, e]
    assert ctx.basis.order == (1, 0)
    assert ctx.Bs[0] == QMatrix(2, vs, {(1, 0): q, (0, 1): vs.one()})
    assert ctx.classical[0] == QMatrix(2, vs, {(0, 1): vs.one()})


@pytest.mark.parametrize("letter,rank", TYPES)
def test_products_of_divisors(letter, rank):
    # [l_i] * [l_j] = [l_i][l_j] + delta_ij q_j
    ctx = context(letter, rank)
    e = _e(ctx)
    vs = ctx.Bs[0].vs
    for i in range(rank):
        for j in range(rank):
            quantum = ctx.Bs[i].apply(ctx.Bs[j].apply(e))
            classical = ctx.classical[i].apply(ctx.classical[j].apply(e))
            corr = vs.var(j) if i == j else vs.zero()
            assert [a - b for a, b in zip(quantum, classical)] == [x * corr for x in e]


@pytest.mark.parametrize("letter,rank", [("A", 2), ("A", 3), ("B", 2), ("G", 2), ("C", 2)])
def test_degree_of_flag_variety(letter, rank):
    # int c_1(L_lam)^N = N! prod <lam, a^v> / <rho, a^v> over positive coroots
    ctx = context(letter, rank)
    N = ctx.rs.n_positive
    top = ctx.basis.top_position
    for lam in [(1,) * rank, tuple(range(1, rank + 1))]:
        M = ctx.classical[0].scale_poly(ctx.classical[0].vs.const(lam[0]))
        for i in range(1, rank):
            M = M + ctx.classical[i].scale_poly(ctx.classical[i].vs.const(lam[i]))
        v = _e(ctx)
        for _ in range(N):
            v = M.apply(v)
        got = v[top].constant_term()
        expect = Fraction(factorial(N)) * prod(
            Fraction(sum(a * c for a, c in zip(lam, cor)), sum(cor)) for cor in ctx.rs.positive_coroots)
        assert got == expect


@pytest.mark.parametrize("letter,rank", TYPES)
def test_hypotheses_pass(letter, rank):
    ctx = context(letter, rank)
    checks = verify_hypotheses(ctx.Bs, ctx.rs, ctx.W)
    assert len(checks) == 7
    assert all(c.passed for c in checks), [c.name for c in checks if not c.passed]
    assert check_nilpotent(ctx.Bs, ctx.rs.n_positive).passed


@pytest.mark.parametrize("letter,rank", TYPES)
def test_relations_and_borel(letter, rank):
    ctx = context(letter, rank)
    rel = verify_relations([t.F for t in ctx.integrals], ctx.Bs, ctx.rs, ctx.W)
    assert all(c.passed for c in rel)
    assert all(c.passed for c in borel_check(list(ctx.invariants), ctx.classical))
    for B, C in zip(ctx.Bs, ctx.classical):
        assert B.at_q_zero() == C


def test_a1_relation_polynomial():
    ctx = context("A", 1)
    vs = relation_vars(1)
    q, l = vs.gens()
    assert relation_polynomial(ctx.integrals[0].F, ctx.rs) == (l ** 2).scale(2) - q.scale(2)


def test_classical_fails_quadratic_identity():
    ctx = context("A", 2)
    chk = check_quadratic_identity(ctx.classical, ctx.rs, ctx.basis)
    assert not chk.passed
    assert chk.failures[0]["lhs"] == "0"


def test_planted_term_fails_divisor():
    ctx = context("A", 2)
    vs = ctx.Bs[0].vs
    entries = dict(ctx.Bs[0].entries)
    entries[(0, 5)] = vs.var(1)
    chk = check_divisor([QMatrix(6, vs, entries), ctx.Bs[1]])
    assert not chk.passed
    assert chk.failures == [{"matrix": 1, "row": 0, "col": 5, "exps": [0, 1]}]


def test_pairing_is_involution():
    ctx = context("A", 3)
    P, dual = pairing_data(ctx.W)
    assert all(dual[dual[k]] == k for k in range(len(dual)))
    assert all(ctx.basis.lengths[k] + ctx.basis.lengths[dual[k]] == ctx.rs.n_positive for k in range(len(dual)))
    # multiplication by l_i is self-adjoint for the Poincare pairing: P B = (P B)^T
    for B in ctx.Bs:
        PB = {(r, c): B[(dual[r], c)] for r in range(len(dual)) for c in range(len(dual))}
        assert all(PB[(r, c)] == PB[(c, r)] for r, c in PB)


def test_qmatrix_json_roundtrip():
    B = context("B", 2).Bs[1]
    assert QMatrix.from_json(B.to_json()) == B
    assert dual_operators([B])[0].transpose() == B
