"""
W-invariant polynomials on t: Reynolds averaging, fundamental degrees and a
deterministic choice of Chevalley generators u_1..u_l.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import factorial

from .exactalg import SparsePoly, VarSet, determinant, poly_determinant
from .rootsys import RootSystem, WeylGroup


class IndependenceSearchFailed(RuntimeError):
    pass


def weight_vars(rank: int) -> VarSet:
    return VarSet.make([f"l{i + 1}" for i in range(rank)])


def act_on_poly(w, p: SparsePoly) -> SparsePoly:
    """Apply a Weyl matrix (fundamental-weight coordinates) to a polynomial in the lambdas."""
    vs = p.vs
    l = vs.n
    images = {i: SparsePoly(vs, {tuple(int(k == j) for k in range(l)): w[j][i] for j in range(l)})
              for i in range(l)}
    return p.substitute(images, vs)


def reynolds(p: SparsePoly, W: WeylGroup) -> SparsePoly:
    acc = p.vs.zero()
    for w in W.elements:
        acc = acc + act_on_poly(w, p)
    return acc.scale(Fraction(1, W.order))


def _power_of_linear(form: tuple, d: int, vs: VarSet) -> dict:
    """Multinomial expansion of (sum form_i l_i)^d as a raw term dict."""
    l = len(form)
    out: dict = {}

    def rec(i, left, exps, coef):
        if i == l - 1:
            e = exps + (left,)
            c = coef * Fraction(form[i]) ** left / factorial(left)
            if c:
                out[e] = out.get(e, 0) + c
            return
        for k in range(left + 1):
            c = coef * Fraction(form[i]) ** k / factorial(k)
            if c or k == 0:
                rec(i + 1, left - k, exps + (k,), c)

    rec(0, d, (), Fraction(factorial(d)))
    return out


def reynolds_of_power(form: tuple, d: int, W: WeylGroup) -> SparsePoly:
    """Reynolds average of (linear form)^d, summed over the orbit of the form."""
    vs = weight_vars(W.rs.rank)
    l = len(form)
    orbit: dict[tuple, int] = {}
    for w in W.elements:
        img = tuple(sum(w[j][i] * form[i] for i in range(l)) for j in range(l))
        orbit[img] = orbit.get(img, 0) + 1
    acc: dict = {}
    for img, mult in orbit.items():
        for e, c in _power_of_linear(img, d, vs).items():
            acc[e] = acc.get(e, 0) + mult * c
    n = W.order
    return SparsePoly(vs, {e: c / n for e, c in acc.items()})


def _charpoly_reversed(M) -> list[Fraction]:
    """Coefficients c_k of det(I - t M) = sum c_k t^k (Faddeev-LeVerrier)."""
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A (M_{k-1} + c_{k-1} I)
        prev = [[Mk[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        Mk = [[sum(A[i][m] * prev[m][j] for m in range(n)) for j in range(n)] for i in range(n)]
        coeffs.append(-sum(Mk[i][i] for i in range(n)) / k)
    # coeffs are those of det(xI - M) = x^n + c_1 x^{n-1} + ...; reversed form matches det(I - tM)
    return coeffs


def invariant_dimensions(W: WeylGroup, max_degree: int) -> list[int]:
    """dim of degree-d invariants = trace (= rank) of the Reynolds projector on S^d."""
    totals = [Fraction(0)] * (max_degree + 1)
    for w in W.elements:
        c = _charpoly_reversed(w)
        h = [Fraction(1)]
        for d in range(1, max_degree + 1):
            h.append(-sum(c[k] * h[d - k] for k in range(1, min(d, len(c) - 1) + 1)))
        for d in range(max_degree + 1):
            totals[d] += h[d]
    dims = []
    for t in totals:
        v = t / W.order
        if v.denominator != 1:
            raise ArithmeticError("non-integral invariant dimension")
        dims.append(int(v))
    return dims


def fundamental_degrees(rs: RootSystem, W: WeylGroup) -> list[int]:
    """Degrees of a minimal generating set of invariants, read off the Hilbert series."""
    bound = 2 * rs.n_positive + 2
    dims = invariant_dimensions(W, bound)
    degrees: list[int] = []
    # coefficients of prod 1/(1 - t^d) over generators found so far
    series = [1] + [0] * bound
    for d in range(1, bound + 1):
        new = dims[d] - series[d]
        if new < 0:
            raise ArithmeticError("Hilbert series inconsistent with a polynomial ring")
        for _ in range(new):
            degrees.append(d)
            for m in range(d, bound + 1):
                series[m] += series[m - d]
        if len(degrees) == rs.rank:
            break
    prod = 1
    for d in degrees:
        prod *= d
    if len(degrees) != rs.rank or prod != W.order:
        raise ArithmeticError(f"degrees {degrees} do not multiply to |W| = {W.order}")
    return degrees


def quadratic_invariant(rs: RootSystem) -> SparsePoly:
    """u_1 = sum_ij <alpha_i^vee, alpha_j^vee> l_i l_j."""
    vs = weight_vars(rs.rank)
    terms: dict = {}
    for i in range(rs.rank):
        for j in range(rs.rank):
            e = [0] * rs.rank
            e[i] += 1
            e[j] += 1
            e = tuple(e)
            terms[e] = terms.get(e, 0) + rs.gram[i][j]
    return SparsePoly(vs, terms)


def jacobian(polys: list[SparsePoly]) -> list[list[SparsePoly]]:
    return [[p.diff(j) for j in range(p.vs.n)] for p in polys]


def jacobian_determinant(polys: list[SparsePoly]) -> SparsePoly:
    return poly_determinant(jacobian(polys))


_PROBES = [(1, 2, 5, 11), (3, -1, 2, 7), (2, 7, -3, 1), (5, 3, 13, -2)]


def _independent(polys: list[SparsePoly]) -> bool:
    """Full-rank Jacobian, certified exactly.

    A nonzero minor at a rational point already proves independence; only if
    every probe vanishes do we expand the minors symbolically.
    """
    k = len(polys)
    l = polys[0].vs.n
    J = jacobian(polys)
    for probe in _PROBES:
        pt = probe[:l]
        num = [[e.evaluate(pt) for e in row] for row in J]
        for cols in combinations(range(l), k):
            if determinant([[row[c] for c in cols] for row in num]):
                return True
    for cols in combinations(range(l), k):
        if not poly_determinant([[row[c] for c in cols] for row in J]).is_zero():
            return True
    return False


@dataclass(frozen=True)
class InvariantSet:
    polys: tuple[SparsePoly, ...]
    degrees: tuple[int, ...]

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, k):
        return self.polys[k]

    def __len__(self):
        return len(self.polys)


def perturbation_schedule(rank: int, steps: int = 6):
    """Linear forms tried in order: rho + m*lambda_1 first, then rho + m*lambda_j.

    The lambda_1 line alone is degenerate for D4 (the Pfaffian direction is
    never reached), hence the later directions.
    """
    for j in range(rank):
        for m in range(0 if j == 0 else 1, steps):
            yield tuple(1 + (m if i == j else 0) for i in range(rank))


def chevalley_generators(rs: RootSystem, W: WeylGroup) -> InvariantSet:
    """u_1 is the coroot quadratic form; each higher u_k is the averaged power
    of the first form in :func:`perturbation_schedule` passing the Jacobian test."""
    degrees = fundamental_degrees(rs, W)
    gens = [quadratic_invariant(rs)]
    for d in degrees[1:]:
        for form in perturbation_schedule(rs.rank):
            cand = reynolds_of_power(form, d, W)
            if cand.is_zero():
                continue
            if _independent(gens + [cand]):
                gens.append(cand)
                break
        else:
            raise IndependenceSearchFailed(f"no independent invariant of degree {d} for {rs.name}")
    return InvariantSet(tuple(gens), tuple(degrees))


def is_invariant(p: SparsePoly, W: WeylGroup) -> bool:
    return all(act_on_poly(W.simple_reflection(i), p) == p for i in range(W.rs.rank))
