"""
Normal-ordered arithmetic in U(b), where b is the (ax+b)-algebra of the coroot
system: [l_i, l_j] = 0, [l_i, X_j] = delta_ij X_j, [X_i, X_j] = 0.

Elements are stored as sums c * X^I l^J with every X to the left.  The
quantum Toda integrals Omega_k are found as the unique solution of a linear
system: commute with Omega, project to u_k, and live on even X-exponents.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Mapping

from .exactalg import SparsePoly, VarSet, binomial_shift, solve_sparse, to_fraction
from .invariants import InvariantSet, weight_vars
from .rootsys import RootSystem

Key = tuple[tuple[int, ...], tuple[int, ...]]


class RankMismatch(ValueError):
    pass


class TodaSolveError(RuntimeError):
    """The commutant system was not uniquely solvable (an implementation bug)."""


class NOElement:
    """Element of U(b) in normal order: {(I, J): c} meaning sum c X^I l^J."""

    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms: Mapping[Key, object] | None = None):
        self.rank = rank
        clean = {}
        for (I, J), c in (terms or {}).items():
            if len(I) != rank or len(J) != rank:
                raise RankMismatch(f"monomial {(I, J)} has wrong rank")
            c = to_fraction(c)
            if c:
                clean[(tuple(I), tuple(J))] = c
        self.terms = clean

    @classmethod
    def _raw(cls, rank, terms):
        e = object.__new__(cls)
        e.rank = rank
        e.terms = terms
        return e

    @classmethod
    def lam(cls, rank: int, i: int) -> "NOElement":
        z = (0,) * rank
        return cls(rank, {(z, _unit(rank, i)): 1})

    @classmethod
    def X(cls, rank: int, i: int, power: int = 1) -> "NOElement":
        z = (0,) * rank
        return cls(rank, {(_unit(rank, i, power), z): 1})

    @classmethod
    def from_lambda_poly(cls, p: SparsePoly) -> "NOElement":
        z = (0,) * p.vs.n
        return cls._raw(p.vs.n, {(z, e): c for e, c in p.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other):
        if not isinstance(other, NOElement):
            raise TypeError(other)
        if other.rank != self.rank:
            raise RankMismatch(f"rank {self.rank} vs {other.rank}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return NOElement._raw(self.rank, out)

    def __neg__(self):
        return NOElement._raw(self.rank, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "NOElement":
        c = to_fraction(c)
        if not c:
            return NOElement(self.rank)
        return NOElement._raw(self.rank, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return no_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other):
        return isinstance(other, NOElement) and self.rank == other.rank and self.terms == other.terms

    def __hash__(self):
        return hash((self.rank, frozenset(self.terms.items())))

    def filtration_degree(self) -> int:
        return max((sum(I) + sum(J) for I, J in self.terms), default=-1)

    def is_even_x(self) -> bool:
        return all(x % 2 == 0 for I, _ in self.terms for x in I)

    def sorted_terms(self):
        return sorted(self.terms.items(),
                      key=lambda t: (sum(t[0][0]) + sum(t[0][1]), t[0][0], t[0][1]), reverse=True)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (I, J), c in self.sorted_terms():
            mono = "*".join(
                [f"X{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(I) if k]
                + [f"l{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(J) if k]
            )
            parts.append(str(c) if not mono else (mono if c == 1 else f"{c}*{mono}"))
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "terms": [{"coeff": str(c), "X": list(I), "L": list(J)} for (I, J), c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, data) -> "NOElement":
        terms = {}
        for t in data["terms"]:
            key = (tuple(t["X"]), tuple(t["L"]))
            if key in terms:
                raise ValueError(f"duplicate monomial {key}")
            terms[key] = to_fraction(t["coeff"])
        return cls(int(data["rank"]), terms)


def _unit(rank: int, i: int, power: int = 1) -> tuple[int, ...]:
    return tuple(power if k == i else 0 for k in range(rank))


@lru_cache(maxsize=None)
def _shifted_lambda_power(J: tuple[int, ...], shift: tuple[int, ...]) -> tuple:
    """prod_i (l_i + shift_i)^{J_i} as a tuple of (exponent, coeff) pairs."""
    acc = {(): 1}
    for n, a in zip(J, shift):
        nxt = {}
        for e, c in acc.items():
            for k, b in binomial_shift(n, a):
                if b:
                    ne = e + (k,)
                    nxt[ne] = nxt.get(ne, 0) + c * b
        acc = nxt
    return tuple(acc.items())


def no_mul(a: NOElement, b: NOElement) -> NOElement:
    """X^I1 l^J1 * X^I2 l^J2 = X^(I1+I2) prod_i (l_i + I2_i)^J1_i l^J2."""
    a._check(b)
    out: dict = {}
    for (I1, J1), c1 in a.terms.items():
        for (I2, J2), c2 in b.terms.items():
            I = tuple(x + y for x, y in zip(I1, I2))
            c12 = c1 * c2
            for e, c in _shifted_lambda_power(J1, I2):
                key = (I, tuple(x + y for x, y in zip(e, J2)))
                out[key] = out.get(key, 0) + c12 * c
    return NOElement._raw(a.rank, {k: c for k, c in out.items() if c})


def commutator_uenv(a: NOElement, b: NOElement) -> NOElement:
    return no_mul(a, b) - no_mul(b, a)


def mu_projection(a: NOElement) -> SparsePoly:
    """Kill every term carrying an X; what remains is a polynomial in the l_i."""
    vs = weight_vars(a.rank)
    return SparsePoly(vs, {J: c for (I, J), c in a.terms.items() if not any(I)})


def build_Omega(rs: RootSystem) -> NOElement:
    l = rs.rank
    terms: dict = {}
    z = (0,) * l
    for i in range(l):
        for j in range(l):
            J = tuple((i == k) + (j == k) for k in range(l))
            terms[(z, J)] = terms.get((z, J), 0) + rs.gram[i][j]
        terms[(_unit(l, i, 2), z)] = Fraction(1)
    return NOElement(l, terms)


def _compositions(total_max: int, n: int) -> Iterator[tuple[int, ...]]:
    for e in product(range(total_max + 1), repeat=n):
        if sum(e) <= total_max:
            yield e


def solve_Omega_k(rs: RootSystem, u: SparsePoly, degree: int | None = None) -> NOElement:
    """The unique Omega_k with [Omega_k, Omega] = 0, mu(Omega_k) = u and
    filtration degree deg u, searched among even-X monomials X^{2I} l^J."""
    l = rs.rank
    d = u.degree() if degree is None else degree
    if not u.is_homogeneous(weighted=False) or u.degree() != d:
        raise ValueError("u must be homogeneous of the stated degree")
    omega = build_Omega(rs)

    # Unknowns: coefficients of X^{2I} l^J with I != 0 and 2|I| + |J| <= d.
    # The I = 0 part is pinned to u by the projection condition.
    unknowns: list[Key] = []
    for I in _compositions(d // 2, l):
        if not any(I):
            continue
        for J in _compositions(d - 2 * sum(I), l):
            unknowns.append((tuple(2 * x for x in I), J))

    fixed = NOElement.from_lambda_poly(u)
    rhs_elem = -commutator_uenv(fixed, omega)
    row_index: dict[Key, int] = {}
    rows: list[dict[int, Fraction]] = []
    rhs: list[Fraction] = []

    def row_for(key):
        if key not in row_index:
            row_index[key] = len(rows)
            rows.append({})
            rhs.append(Fraction(0))
        return row_index[key]

    for col, key in enumerate(unknowns):
        comm = commutator_uenv(NOElement._raw(l, {key: Fraction(1)}), omega)
        for k, c in comm.terms.items():
            rows[row_for(k)][col] = c
    for k, c in rhs_elem.terms.items():
        rhs[row_for(k)] = c

    sol = solve_sparse(rows, rhs, len(unknowns))
    if sol.status == "inconsistent":
        raise TodaSolveError(f"no commuting lift of degree {d} for {rs.name}")
    if sol.status != "unique":
        raise TodaSolveError(
            f"commuting lift of degree {d} for {rs.name} is not unique (kernel dim {sol.kernel_dimension})")
    terms = dict(fixed.terms)
    for key, c in zip(unknowns, sol.particular):
        if c:
            terms[key] = c
    result = NOElement._raw(l, terms)
    if not commutator_uenv(result, omega).is_zero():
        raise TodaSolveError("solution does not commute with Omega")
    return result


def fk_vars(rank: int) -> VarSet:
    """Variables Q_1..Q_l (weight 2, standing for X_i^2) and L_1..L_l (weight 1)."""
    return VarSet.make([f"Q{i + 1}" for i in range(rank)] + [f"L{i + 1}" for i in range(rank)],
                       [2] * rank + [1] * rank)


def split_F_f(omega_k: NOElement, degree: int | None = None) -> tuple[SparsePoly, SparsePoly]:
    """Rewrite X^{2I} l^J as Q^I L^J and split into the top-degree part F_k and
    the lower-order remainder f_k."""
    if not omega_k.is_even_x():
        raise ValueError("odd X-exponent: not of the even form")
    l = omega_k.rank
    vs = fk_vars(l)
    d = omega_k.filtration_degree() if degree is None else degree
    top, rest = {}, {}
    for (I, J), c in omega_k.terms.items():
        e = tuple(x // 2 for x in I) + J
        (top if vs.weighted_degree(e) == d else rest)[e] = c
    F, f = SparsePoly(vs, top), SparsePoly(vs, rest)
    for e in f.terms:
        if not any(e[:l]):
            raise TodaSolveError(f"lower-order term {e} without any Q")
    return F, f


def poisson_bracket(F: SparsePoly, G: SparsePoly) -> SparsePoly:
    """{F, G} with {L_i, Q_j} = 2 delta_ij Q_j, other brackets zero."""
    l = F.vs.n // 2
    out = F.vs.zero()
    for i in range(l):
        Qi = F.vs.var(i)
        term = F.diff(l + i) * G.diff(i) - F.diff(i) * G.diff(l + i)
        out = out + (term * Qi).scale(2)
    return out


def poisson_check(F: SparsePoly, G: SparsePoly) -> bool:
    return poisson_bracket(F, G).is_zero()


@dataclass(frozen=True)
class TodaIntegral:
    k: int
    degree: int
    u: SparsePoly
    omega: NOElement
    F: SparsePoly
    f: SparsePoly


def toda_integrals(rs: RootSystem, inv: InvariantSet) -> list[TodaIntegral]:
    out = []
    for k, (u, d) in enumerate(zip(inv.polys, inv.degrees), start=1):
        om = build_Omega(rs) if k == 1 else solve_Omega_k(rs, u, d)
        F, f = split_F_f(om, d)
        out.append(TodaIntegral(k, d, u, om, F, f))
    return out


def F_at_zero_Q(F: SparsePoly) -> SparsePoly:
    """F(0, ..., 0, L) viewed as a polynomial in l_1..l_l."""
    l = F.vs.n // 2
    vs = weight_vars(l)
    return SparsePoly(vs, {e[l:]: c for e, c in F.terms.items() if not any(e[:l])})
