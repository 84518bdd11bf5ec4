"""
Formal flat sections of h ds/dt_i = A_i s, with A_i = ([lambda_i] o)^T in the
dual Schubert basis, and the annihilation checks built on them.

A section is a truncated series sum_d s_d(t, h) e^{t.d}; every s_d is a
vector of polynomials in t with Laurent-polynomial coefficients in h.  The
solver works degree by degree:

* d = 0: s_0 = exp(sum_i t_i A'_i / h) a, finite because A'_i is nilpotent;
* d != 0: pick i with d_i > 0; then s_d is the unique polynomial solution of
  h (d/dt_i + d_i) s_d = A'_i s_d + sum_{0 < u <= d} (A_i)_u s_{d-u},
  where A'_i - h d_i is invertible.

All other equations are then confirmed by the residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .diffop import DiffOp, apply_scalar
from .exactalg import determinant, leading_minors, mat_inverse, to_fraction
from .qcoh import (QMatrix, SchubertBasis, check_commutation, check_flatness, check_triangular,
                   dual_operators)
from .rootsys import RootSystem
from .series import HTPoly, ScalarSeries, multi_indices, vec_is_zero, vec_zero

SparseMat = dict  # {(row, col): Fraction}


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# single-variable polynomial ODEs
# ---------------------------------------------------------------------------

def _matvec(A, v):
    return [sum((A[r][c] * v[c] for c in range(len(v))), Fraction(0)) for r in range(len(A))]


def _is_nilpotent(A) -> bool:
    n = len(A)
    P = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(n):
        P = [[sum((P[i][k] * A[k][j] for k in range(n)), Fraction(0)) for j in range(n)] for i in range(n)]
    return all(x == 0 for row in P for x in row)


def solve_poly_ode(A: Sequence[Sequence], g: Sequence[Sequence], f0: Sequence | None = None) -> list[list[Fraction]]:
    """Polynomial solution of df/dt = A f + g.

    ``g`` and the result are lists of coefficient vectors (entry k multiplies
    t^k).  For invertible A the solution is unique and ``f0`` must be absent;
    for nilpotent A the constant term ``f0`` is required and fixes it.
    """
    A = [[to_fraction(x) for x in row] for row in A]
    n = len(A)
    g = [[to_fraction(x) for x in v] for v in g]
    if _is_nilpotent(A):
        if f0 is None:
            raise ValueError("nilpotent system needs the constant term f0")
        f = [[to_fraction(x) for x in f0]]
        j = 0
        while True:
            gj = g[j] if j < len(g) else [Fraction(0)] * n
            nxt = [(x + y) / (j + 1) for x, y in zip(_matvec(A, f[j]), gj)]
            j += 1
            if j >= len(g) and not any(nxt):
                break
            f.append(nxt)
        while len(f) > 1 and not any(f[-1]):
            f.pop()
        return f
    if determinant(A) == 0:
        raise ValueError("matrix is neither invertible nor nilpotent")
    if f0 is not None:
        raise ValueError("invertible system has a unique solution; f0 must not be given")
    Minv = mat_inverse(A)
    # f = - sum_k M^{-(k+1)} g^{(k)}
    f = [[Fraction(0)] * n for _ in range(max(len(g), 1))]
    deriv = [list(v) for v in g]
    k = 0
    while deriv:
        vecs = deriv
        for _ in range(k + 1):
            vecs = [_matvec(Minv, v) for v in vecs]
        for p, v in enumerate(vecs):
            f[p] = [a - b for a, b in zip(f[p], v)]
        deriv = [[x * (p + 1) for x in deriv[p + 1]] for p in range(len(deriv) - 1)]
        k += 1
    while len(f) > 1 and not any(f[-1]):
        f.pop()
    return f


# ---------------------------------------------------------------------------
# vector series
# ---------------------------------------------------------------------------

def _apply(M: SparseMat, v: list[HTPoly], scale=1, hshift: int = 0) -> list[HTPoly]:
    out = vec_zero(v[0].nt, len(v))
    for (r, c), x in M.items():
        if v[c]:
            out[r] = out[r] + v[c].scale(x * scale, hshift)
    return out


def _vadd(a, b):
    return [x + y for x, y in zip(a, b)]


@dataclass
class FormalSection:
    """sum_d s_d e^{t.d} with vector coefficients, truncated at |d| <= order."""

    nt: int
    size: int
    order: int
    coeffs: dict  # d -> list[HTPoly]

    def __getitem__(self, d) -> list[HTPoly]:
        return self.coeffs.get(tuple(d), vec_zero(self.nt, self.size))

    def is_zero(self) -> bool:
        return all(vec_is_zero(v) for v in self.coeffs.values())

    def __add__(self, other: "FormalSection") -> "FormalSection":
        keys = set(self.coeffs) | set(other.coeffs)
        return FormalSection(self.nt, self.size, min(self.order, other.order),
                             {d: _vadd(self[d], other[d]) for d in keys})

    def __eq__(self, other):
        if not isinstance(other, FormalSection) or other.order != self.order:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self[d] == other[d] for d in keys)

    def component(self, pos: int) -> ScalarSeries:
        return ScalarSeries(self.nt, self.order, {d: v[pos] for d, v in self.coeffs.items()})

    def at_h(self, value) -> "FormalSection":
        return FormalSection(self.nt, self.size, self.order,
                             {d: [p.at_h(value) for p in v] for d, v in self.coeffs.items()})

    def constant_term(self) -> list[HTPoly]:
        return [p.at_t([0] * self.nt) for p in self[(0,) * self.nt]]

    def to_json(self) -> dict:
        out = []
        for d in sorted(self.coeffs, key=lambda d: (sum(d), d)):
            v = self.coeffs[d]
            if not vec_is_zero(v):
                out.append({"d": list(d), "vector": [p.to_json() for p in v]})
        return {"order": self.order, "size": self.size, "coeffs": out}


def split_coefficients(As: Sequence[QMatrix]) -> list[dict]:
    """For each A_i: {q-exponent u: constant sparse matrix (A_i)_u}."""
    return [A.coefficient_matrices() for A in As]


def check_flat_preconditions(As: Sequence[QMatrix]) -> list:
    """(a) commuting, (b) d_i A_j = d_j A_i, (c) triangular split.

    Stated for the A_i; they are the transposes of the B_i, so the B-level
    checks carry over after transposing back.
    """
    Bs = [A.transpose() for A in As]
    return [check_commutation(As), check_flatness(As), check_triangular(Bs)]


def solve_flat_section(As: Sequence[QMatrix], a: Sequence, order: int, check: bool = True) -> FormalSection:
    l = As[0].vs.n
    n = As[0].n
    a = [to_fraction(x) for x in a]
    if len(a) != n:
        raise ValueError("initial vector has the wrong size")
    if check:
        failed = [c.name for c in check_flat_preconditions(As) if not c.passed]
        if failed:
            raise PreconditionError(f"operators fail {', '.join(failed)}")
    parts = split_coefficients(As)
    zero_u = (0,) * l
    nil = [p.get(zero_u, {}) for p in parts]

    coeffs: dict = {}
    # degree zero: commuting nilpotent exponential
    term = [HTPoly.const(l, x) for x in a]
    s0 = list(term)
    k = 1
    while not vec_is_zero(term):
        nxt = vec_zero(l, n)
        for i in range(l):
            nxt = _vadd(nxt, [p.times_t(i) for p in _apply(nil[i], term, Fraction(1, k), -1)])
        term = nxt
        s0 = _vadd(s0, term)
        k += 1
    coeffs[zero_u] = s0

    for d in multi_indices(l, order):
        if not any(d):
            continue
        i = next(j for j, x in enumerate(d) if x)
        b = vec_zero(l, n)
        for u, M in parts[i].items():
            if not any(u) or any(x > y for x, y in zip(u, d)):
                continue
            prev = coeffs.get(tuple(y - x for x, y in zip(u, d)))
            if prev is not None:
                b = _vadd(b, _apply(M, prev))
        coeffs[d] = _solve_shifted(nil[i], d[i], i, [p.scale(1, -1) for p in b])
    return FormalSection(l, n, order, coeffs)


def _solve_shifted(N: SparseMat, di: int, i: int, g: list[HTPoly]) -> list[HTPoly]:
    """Unique polynomial solution of d f/dt_i = M f + g with M = N/h - d_i."""
    n = len(g)
    nt = g[0].nt

    def minv(v):
        # M^{-1} = -(1/d_i) sum_j (N / (h d_i))^j
        acc = list(v)
        term = v
        while True:
            term = _apply(N, term, Fraction(1, di), -1)
            if vec_is_zero(term):
                break
            acc = _vadd(acc, term)
        return [p.scale(Fraction(-1, di)) for p in acc]

    f = vec_zero(nt, n)
    deriv = g
    k = 0
    while not vec_is_zero(deriv):
        v = deriv
        for _ in range(k + 1):
            v = minv(v)
        f = [x - y for x, y in zip(f, v)]
        deriv = [p.dt(i) for p in deriv]
        k += 1
    return f


def flat_residuals(As: Sequence[QMatrix], s: FormalSection) -> list[FormalSection]:
    """h d_i s - A_i s for every i, on all degrees |d| <= order."""
    l, n = s.nt, s.size
    parts = split_coefficients(As)
    out = []
    for i in range(l):
        res = {}
        for d in multi_indices(l, s.order):
            sd = s[d]
            lhs = [(p.dt(i) + p.scale(d[i])).scale(1, 1) for p in sd]
            rhs = vec_zero(l, n)
            for u, M in parts[i].items():
                if any(x > y for x, y in zip(u, d)):
                    continue
                rhs = _vadd(rhs, _apply(M, s[tuple(y - x for x, y in zip(u, d))]))
            r = [x - y for x, y in zip(lhs, rhs)]
            if not vec_is_zero(r):
                res[d] = r
        out.append(FormalSection(l, n, s.order, res))
    return out


def pair_with_one(s: FormalSection, basis: SchubertBasis) -> ScalarSeries:
    """(s, 1): the coordinate dual to the identity class."""
    return s.component(basis.identity_position)


def pair_with_vector(s: FormalSection, f: FormalSection) -> ScalarSeries:
    """(s, f) = sum_u s_u f_u as a product of series (dual bases)."""
    order = min(s.order, f.order)
    acc: dict = {}
    for d1, v1 in s.coeffs.items():
        for d2, v2 in f.coeffs.items():
            d = tuple(x + y for x, y in zip(d1, d2))
            if sum(d) > order:
                continue
            for a, b in zip(v1, v2):
                if a and b:
                    p = a * b
                    acc[d] = acc[d] + p if d in acc else p
    return ScalarSeries(s.nt, order, acc)


def annihilation_check(op: DiffOp, s: FormalSection, basis: SchubertBasis) -> ScalarSeries:
    """op applied to (s, 1); zero when op is a quantum differential operator."""
    return apply_scalar(op, pair_with_one(s, basis))


def operator_on_vector(op: DiffOp, Bs: Sequence[QMatrix], f: FormalSection) -> FormalSection:
    """op(e^t, B + h d, h) applied to a vector series f (original basis)."""
    l, n = f.nt, f.size
    parts = [B.coefficient_matrices() for B in Bs]

    def L(i, vec: FormalSection) -> FormalSection:
        res: dict = {}
        for d, v in vec.coeffs.items():
            cur = [(p.dt(i) + p.scale(d[i])).scale(1, 1) for p in v]
            res[d] = _vadd(res[d], cur) if d in res else cur
            for u, M in parts[i].items():
                t = tuple(x + y for x, y in zip(d, u))
                if sum(t) > vec.order:
                    continue
                w = _apply(M, v)
                res[t] = _vadd(res[t], w) if t in res else w
        return FormalSection(l, n, vec.order, res)

    total = FormalSection(l, n, f.order, {})
    for (D, J, m), c in op.terms.items():
        cur = f
        for i, k in enumerate(J):
            for _ in range(k):
                cur = L(i, cur)
        shifted = {}
        for d, v in cur.coeffs.items():
            t = tuple(x + y for x, y in zip(d, D))
            if sum(t) <= f.order:
                shifted[t] = [p.scale(c, m) for p in v]
        total = total + FormalSection(l, n, f.order, shifted)
    return total


def divisor_pairing_check(op: DiffOp, s: FormalSection, f_vec: Sequence, Bs: Sequence[QMatrix]) -> ScalarSeries:
    """op.(s, f) - (s, op(e^t, B + h d, h).f) for a constant vector f; expected zero."""
    l, n = s.nt, s.size
    f = FormalSection(l, n, s.order, {(0,) * l: [HTPoly.const(l, x) for x in f_vec]})
    lhs = apply_scalar(op, pair_with_vector(s, f))
    rhs = pair_with_vector(s, operator_on_vector(op, Bs, f)).truncate(lhs.order)
    return lhs - rhs


def gram_certificate(rs: RootSystem, max_degree: int = 3) -> dict:
    """Positive definiteness of the coroot Gram matrix, with the quadratic form
    sum G_ij d_i d_j listed for every 0 < |d| <= max_degree.

    With G positive definite, H cannot kill a nonzero series whose e^0 term
    vanishes, so a truncated residual that is zero is meaningful.
    """
    minors = leading_minors(rs.gram)
    values = {}
    for d in multi_indices(rs.rank, max_degree):
        if any(d):
            values[d] = rs.coroot_norm(d)
    return {
        "minors": minors,
        "positive_definite": all(m > 0 for m in minors),
        "quadratic_values": values,
        "all_positive": all(v > 0 for v in values.values()),
    }


def flat_sections_for_basis(Bs: Sequence[QMatrix], order: int) -> list[FormalSection]:
    As = dual_operators(Bs)
    n = As[0].n
    out = []
    for k in range(n):
        a = [int(j == k) for j in range(n)]
        out.append(solve_flat_section(As, a, order, check=(k == 0)))
    return out
