from fractions import Fraction
from math import factorial

import pytest
import sympy as sp

from qtoda.diffop import DiffOp
from qtoda.flatsec import (FormalSection, PreconditionError, annihilation_check, flat_residuals,
                           divisor_pairing_check, gram_certificate, pair_with_one, solve_flat_section,
                           solve_poly_ode)
from qtoda.pipeline import inject_fault
from qtoda.qcoh import dual_operators
from qtoda.series import HTPoly, vec_is_zero

from conftest import context


def _unit(n, k):
    return [int(j == k) for j in range(n)]


def _to_sympy(p: HTPoly, t, h):
    return sum(sp.Rational(c.numerator, c.denominator) * h ** he * sp.Mul(*[ti ** k for ti, k in zip(t, te)])
               for (te, he), c in p.terms.items())


# ---- single-variable ODE ----

def test_ode_invertible():
    assert solve_poly_ode([[-1]], [[1]]) == [[1]]


def test_ode_nilpotent_antiderivative():
    assert solve_poly_ode([[0]], [[1]], [0]) == [[0], [1]]
    assert solve_poly_ode([[0]], [[0]], [Fraction(7, 3)]) == [[Fraction(7, 3)]]


def test_ode_invertible_polynomial_source():
    # f' = 2f + t  ->  f = -t/2 - 1/4
    f = solve_poly_ode([[2]], [[0], [1]])
    assert f == [[Fraction(-1, 4)], [Fraction(-1, 2)]]


def test_ode_nilpotent_jordan_block():
    # f' = N f with N e_2 = e_1: f = (c1 + c2 t, c2)
    f = solve_poly_ode([[0, 1], [0, 0]], [], [3, 5])
    assert f == [[3, 5], [5, 0]]


def test_ode_errors():
    with pytest.raises(ValueError):
        solve_poly_ode([[1, 0], [0, 0]], [[1, 1]])
    with pytest.raises(ValueError):
        solve_poly_ode([[0]], [[1]])
    with pytest.raises(ValueError):
        solve_poly_ode([[-1]], [[1]], [0])


# ---- flat sections ----

def test_a1_bessel_series():
    # H.(s,1) = 0 with H = 2(h d)^2 - 2e^t forces c_k = c_{k-1} / (h^2 k^2)
    ctx = context("A", 1)
    N = 5
    s = solve_flat_section(dual_operators(ctx.Bs), _unit(2, ctx.basis.identity_position), N)
    g = pair_with_one(s, ctx.basis)
    for k in range(N + 1):
        assert g[(k,)] == HTPoly.const(1, Fraction(1, factorial(k) ** 2), -2 * k)


def test_a1_low_degree_terms():
    ctx = context("A", 1)
    As = dual_operators(ctx.Bs)
    s = solve_flat_section(As, _unit(2, 1), 2)
    assert s[(0,)] == [HTPoly(1), HTPoly.const(1, 1)]
    assert s[(1,)] == [HTPoly.const(1, 1, -1), HTPoly.const(1, 1, -2)]
    assert s[(2,)] == [HTPoly.const(1, Fraction(1, 2), -3), HTPoly.const(1, Fraction(1, 4), -4)]
    s = solve_flat_section(As, _unit(2, 0), 0)
    assert s[(0,)] == [HTPoly.const(1, 1), HTPoly(1, {((1,), -1): 1})]


def test_a1_direct_substitution():
    ctx = context("A", 1)
    N = 3
    As = dual_operators(ctx.Bs)
    t, h = sp.symbols("t h")
    for k in range(2):
        s = solve_flat_section(As, _unit(2, k), N)
        vec = [sum(_to_sympy(s[(d,)][r], [t], h) * sp.exp(d * t) for d in range(N + 1)) for r in range(2)]
        A = sp.Matrix([[0, sp.exp(t)], [1, 0]])  # B^T with B = [[0, 1], [q, 0]]
        res = sp.expand(h * sp.Matrix(vec).diff(t) - A * sp.Matrix(vec))
        for entry in res:
            poly = sp.Poly(entry.subs(sp.exp(t), sp.Symbol("q")), sp.Symbol("q"))
            for (deg,), coeff in poly.terms():
                if deg <= N:
                    assert sp.simplify(coeff) == 0


def test_q_free_section_is_matrix_exponential():
    ctx = context("A", 2)
    As = [A.at_q_zero() for A in dual_operators(ctx.Bs)]
    t1, t2, h = sp.symbols("t1 t2 h")
    n = 6
    M = sp.zeros(n, n)
    for A, ti in zip(As, (t1, t2)):
        for (r, c), p in A.entries.items():
            M[r, c] += sp.Rational(p.constant_term()) * ti / h
    E = M.exp()
    for k in range(n):
        s = solve_flat_section(As, _unit(n, k), 2)
        assert all(vec_is_zero(v) for d, v in s.coeffs.items() if any(d))
        got = sp.Matrix([_to_sympy(p, (t1, t2), h) for p in s[(0, 0)]])
        assert sp.simplify(got - E[:, k]) == sp.zeros(n, 1)


def test_zero_initial_vector():
    ctx = context("A", 2)
    s = solve_flat_section(dual_operators(ctx.Bs), [0] * 6, 3)
    assert s.is_zero()


def test_linearity_and_determinism():
    ctx = context("B", 2)
    As = dual_operators(ctx.Bs)
    a, b = _unit(8, 2), [0, 1, 0, 0, 0, 0, -3, 0]
    sa = solve_flat_section(As, a, 2)
    sb = solve_flat_section(As, b, 2)
    sab = solve_flat_section(As, [x + y for x, y in zip(a, b)], 2)
    assert sab == sa + sb
    assert solve_flat_section(As, a, 2) == sa
    assert sa.to_json() == solve_flat_section(As, a, 2).to_json()


@pytest.mark.parametrize("letter,rank", [("A", 2), ("B", 2)])
def test_residuals_and_annihilation(letter, rank):
    ctx = context(letter, rank)
    As = dual_operators(ctx.Bs)
    n = len(ctx.basis)
    for k in range(n):
        s = solve_flat_section(As, _unit(n, k), 3)
        assert s.constant_term() == [HTPoly.const(rank, x) for x in _unit(n, k)]
        assert all(r.is_zero() for r in flat_residuals(As, s))
        assert annihilation_check(ctx.H, s, ctx.basis).is_zero()
        for D in ctx.operators:
            assert annihilation_check(D, s, ctx.basis).is_zero()


def test_negative_control_operator():
    ctx = context("A", 2)
    s = solve_flat_section(dual_operators(ctx.Bs), _unit(6, ctx.basis.identity_position), 3)
    op = DiffOp.exp_t(2, (1, 0))
    assert not annihilation_check(op, s, ctx.basis).is_zero()


def test_identity_with_divisor_vectors():
    ctx = context("A", 2)
    As = dual_operators(ctx.Bs)
    s = solve_flat_section(As, _unit(6, 3), 3)
    for j in range(2):
        f = [0] * 6
        f[ctx.basis.position[ctx.W.index[ctx.W.simple_reflection(j)]]] = 1
        assert divisor_pairing_check(ctx.H, s, f, ctx.Bs).is_zero()


def test_pair_with_one_bookkeeping():
    ctx = context("A", 2)
    top = ctx.basis.top_position
    vec = [HTPoly(2) for _ in range(6)]
    vec[top] = HTPoly.const(2, 5)
    s = FormalSection(2, 6, 2, {(0, 0): vec})
    assert pair_with_one(s, ctx.basis).is_zero()
    vec = [HTPoly(2) for _ in range(6)]
    vec[ctx.basis.identity_position] = HTPoly.const(2, 5)
    s = FormalSection(2, 6, 2, {(0, 0): vec})
    assert pair_with_one(s, ctx.basis)[(0, 0)] == HTPoly.const(2, 5)
    assert pair_with_one(FormalSection(2, 6, 2, {}), ctx.basis).is_zero()


def test_precondition_failure():
    ctx = context("A", 2)
    bad = inject_fault("commute", ctx.Bs, ctx.basis)
    with pytest.raises(PreconditionError):
        solve_flat_section(dual_operators(bad), _unit(6, 0), 2)


def test_h_specialisation():
    ctx = context("A", 1)
    s = solve_flat_section(dual_operators(ctx.Bs), _unit(2, 1), 2)
    g = pair_with_one(s, ctx.basis).at_h(2)
    assert g[(2,)] == HTPoly.const(1, Fraction(1, 64))


def test_gram_certificates():
    cert = gram_certificate(context("A", 2).rs, 3)
    assert cert["minors"] == [2, 3]
    assert cert["positive_definite"] and cert["all_positive"]
    assert cert["quadratic_values"][(1, 1)] == 2
    assert gram_certificate(context("A", 1).rs)["minors"] == [2]
