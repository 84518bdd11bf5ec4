"""
Operators built from e^{t_i}, (h d/dt_i) and h, kept in the normal order
e^{t.D} (h d)^J h^m.  The only commutation rule needed is

    (h d)_i e^{t.D} = e^{t.D} ((h d)_i + h D_i).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .exactalg import SparsePoly, VarSet, to_fraction
from .rootsys import RootSystem
from .series import HTPoly, ScalarSeries
from .toda import NOElement, RankMismatch

DKey = tuple[tuple[int, ...], tuple[int, ...], int]


class OddXExponent(ValueError):
    pass


class DiffOp:
    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms: Mapping[DKey, object] | None = None):
        self.rank = rank
        clean = {}
        for (D, J, m), c in (terms or {}).items():
            if len(D) != rank or len(J) != rank:
                raise RankMismatch(f"term {(D, J, m)} has wrong rank")
            if m < 0 or min(D + J, default=0) < 0:
                raise ValueError("negative exponent")
            c = to_fraction(c)
            if c:
                clean[(tuple(D), tuple(J), int(m))] = c
        self.terms = clean

    @classmethod
    def _raw(cls, rank, terms):
        op = object.__new__(cls)
        op.rank = rank
        op.terms = terms
        return op

    @classmethod
    def exp_t(cls, rank: int, D) -> "DiffOp":
        return cls(rank, {(tuple(D), (0,) * rank, 0): 1})

    @classmethod
    def hd(cls, rank: int, i: int) -> "DiffOp":
        J = tuple(int(k == i) for k in range(rank))
        return cls(rank, {((0,) * rank, J, 0): 1})

    @classmethod
    def h(cls, rank: int, power: int = 1) -> "DiffOp":
        z = (0,) * rank
        return cls(rank, {(z, z, power): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, DiffOp) and self.rank == other.rank and self.terms == other.terms

    def __add__(self, other: "DiffOp") -> "DiffOp":
        if other.rank != self.rank:
            raise RankMismatch("rank mismatch")
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return DiffOp._raw(self.rank, out)

    def __neg__(self):
        return DiffOp._raw(self.rank, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DiffOp":
        c = to_fraction(c)
        return DiffOp._raw(self.rank, {k: v * c for k, v in self.terms.items()} if c else {})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return diffop_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def exp_degree(self) -> int:
        """Largest total e^t-degree of a term."""
        return max((sum(D) for D, _, _ in self.terms), default=0)

    def grades(self) -> set[int]:
        return {2 * sum(D) + sum(J) + m for D, J, m in self.terms}

    def is_homogeneous(self, degree: int) -> bool:
        return self.grades() <= {degree}

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0], reverse=True)

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "terms": [{"coeff": str(c), "exp_t": list(D), "hd": list(J), "h": m}
                      for (D, J, m), c in self.sorted_terms()],
        }

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for (D, J, m), c in self.sorted_terms():
            f = [f"e^t{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(D) if k]
            f += [f"hd{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(J) if k]
            if m:
                f.append("h" + (f"^{m}" if m > 1 else ""))
            bits.append(str(c) + ("*" + "*".join(f) if f else ""))
        return " + ".join(bits)

    # polynomial shadow D(Q, L, h)
    def to_poly(self) -> SparsePoly:
        vs = diffop_poly_vars(self.rank)
        return SparsePoly(vs, {D + J + (m,): c for (D, J, m), c in self.terms.items()})


def diffop_poly_vars(rank: int) -> VarSet:
    return VarSet.make([f"Q{i + 1}" for i in range(rank)] + [f"L{i + 1}" for i in range(rank)] + ["h"],
                       [2] * rank + [1] * rank + [1])


@lru_cache(maxsize=None)
def _reorder(J1: tuple[int, ...], D2: tuple[int, ...]) -> tuple:
    """prod_i ((h d)_i + h D2_i)^{J1_i} as ((J, hpow), coeff) pairs."""
    from math import comb
    acc = {((), 0): 1}
    for n, a in zip(J1, D2):
        nxt = {}
        for (J, hp), c in acc.items():
            for k in range(n + 1):
                b = comb(n, k) * a ** (n - k)
                if b:
                    key = (J + (k,), hp + n - k)
                    nxt[key] = nxt.get(key, 0) + c * b
        acc = nxt
    return tuple(acc.items())


def diffop_mul(a: DiffOp, b: DiffOp) -> DiffOp:
    if a.rank != b.rank:
        raise RankMismatch(f"rank {a.rank} vs {b.rank}")
    out: dict = {}
    for (D1, J1, m1), c1 in a.terms.items():
        for (D2, J2, m2), c2 in b.terms.items():
            D = tuple(x + y for x, y in zip(D1, D2))
            c12 = c1 * c2
            for (J, hp), c in _reorder(J1, D2):
                key = (D, tuple(x + y for x, y in zip(J, J2)), m1 + m2 + hp)
                out[key] = out.get(key, 0) + c12 * c
    return DiffOp._raw(a.rank, {k: c for k, c in out.items() if c})


def commutator_diffop(a: DiffOp, b: DiffOp) -> DiffOp:
    return diffop_mul(a, b) - diffop_mul(b, a)


def rho_Dk(omega_k: NOElement, rs: RootSystem, degree: int | None = None) -> DiffOp:
    """D_k = h^{deg} rho(Omega_k) with X_i^2 -> -4 G_ii e^{t_i} / h^2 and l_i -> 2 (h d)_i / h."""
    l = rs.rank
    if omega_k.rank != l:
        raise RankMismatch("rank mismatch")
    d = omega_k.filtration_degree() if degree is None else degree
    out = {}
    for (I, J), c in omega_k.terms.items():
        if any(x % 2 for x in I):
            raise OddXExponent(f"odd X exponent in {I}")
        half = tuple(x // 2 for x in I)
        coef = c * Fraction(2) ** sum(J)
        for i, k in enumerate(half):
            coef *= (-4 * rs.gram[i][i]) ** k
        m = d - 2 * sum(half) - sum(J)
        if m < 0:
            raise ValueError(f"term {(I, J)} exceeds the stated degree {d}")
        out[(half, J, m)] = coef
    return DiffOp(l, out)


def build_H(rs: RootSystem) -> DiffOp:
    """H = sum G_ij (h d)_i (h d)_j - sum G_jj e^{t_j}."""
    l = rs.rank
    z = (0,) * l
    terms: dict = {}
    for i in range(l):
        for j in range(l):
            J = tuple((i == k) + (j == k) for k in range(l))
            terms[(z, J, 0)] = terms.get((z, J, 0), 0) + rs.gram[i][j]
        terms[(tuple(int(k == i) for k in range(l)), z, 0)] = -rs.gram[i][i]
    return DiffOp(l, terms)


def exp_free_part(op: DiffOp) -> SparsePoly:
    """The e^t -> 0 part as a polynomial in (Q, L, h); Q never appears."""
    return SparsePoly(diffop_poly_vars(op.rank),
                      {D + J + (m,): c for (D, J, m), c in op.terms.items() if not any(D)})


def h_zero_symbol(op: DiffOp) -> SparsePoly:
    """The h -> 0 part as a polynomial in (Q, L, h); h never appears."""
    return SparsePoly(diffop_poly_vars(op.rank),
                      {D + J + (0,): c for (D, J, m), c in op.terms.items() if m == 0})


def apply_scalar(op: DiffOp, g: ScalarSeries, order: int | None = None) -> ScalarSeries:
    """Apply op to a truncated series.

    (h d_i)(f_d e^{t.d}) = h (d f_d / d t_i + d_i f_d) e^{t.d}.  The result is
    truncated at ``g.order - op.exp_degree()`` unless ``order`` is given.
    """
    if op.rank != g.nt:
        raise RankMismatch("rank mismatch")
    out_order = g.order - op.exp_degree() if order is None else order
    acc: dict[tuple[int, ...], HTPoly] = {}
    for (D, J, m), c in op.terms.items():
        for d, p in g.coeffs.items():
            target = tuple(x + y for x, y in zip(d, D))
            if sum(target) > out_order:
                continue
            q = p
            for i, k in enumerate(J):
                for _ in range(k):
                    q = (q.dt(i) + q.scale(d[i])).scale(1, hshift=1)
            q = q.scale(c, hshift=m)
            acc[target] = acc[target] + q if target in acc else q
    return ScalarSeries(g.nt, out_order, acc)
