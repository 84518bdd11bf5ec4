"""
Truncated formal series in e^{t_1}, ..., e^{t_l} whose coefficients are
polynomials in t_1..t_l with Laurent-polynomial coefficients in h.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .exactalg import to_fraction

# key: (t-exponent tuple, h-exponent)
HTKey = tuple[tuple[int, ...], int]


class HTPoly:
    """Polynomial in t with coefficients in Q[h, 1/h]."""

    __slots__ = ("nt", "terms")

    def __init__(self, nt: int, terms: Mapping[HTKey, object] | None = None):
        self.nt = nt
        self.terms = {}
        for (te, he), c in (terms or {}).items():
            c = to_fraction(c)
            if c:
                self.terms[(tuple(te), int(he))] = c

    @classmethod
    def _raw(cls, nt, terms):
        p = object.__new__(cls)
        p.nt = nt
        p.terms = terms
        return p

    @classmethod
    def const(cls, nt: int, c, hpow: int = 0) -> "HTPoly":
        return cls(nt, {((0,) * nt, hpow): c})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, HTPoly) and self.nt == other.nt and self.terms == other.terms

    def __add__(self, other: "HTPoly") -> "HTPoly":
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return HTPoly._raw(self.nt, out)

    def __neg__(self):
        return HTPoly._raw(self.nt, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c, hshift: int = 0) -> "HTPoly":
        c = to_fraction(c)
        if not c:
            return HTPoly._raw(self.nt, {})
        return HTPoly._raw(self.nt, {(te, he + hshift): v * c for (te, he), v in self.terms.items()})

    def __mul__(self, other: "HTPoly") -> "HTPoly":
        out: dict = {}
        for (t1, h1), c1 in self.terms.items():
            for (t2, h2), c2 in other.terms.items():
                k = (tuple(a + b for a, b in zip(t1, t2)), h1 + h2)
                out[k] = out.get(k, 0) + c1 * c2
        return HTPoly._raw(self.nt, {k: c for k, c in out.items() if c})

    def dt(self, i: int) -> "HTPoly":
        out = {}
        for (te, he), c in self.terms.items():
            if te[i]:
                out[(te[:i] + (te[i] - 1,) + te[i + 1:], he)] = c * te[i]
        return HTPoly._raw(self.nt, out)

    def times_t(self, i: int) -> "HTPoly":
        return HTPoly._raw(self.nt, {(te[:i] + (te[i] + 1,) + te[i + 1:], he): c
                                     for (te, he), c in self.terms.items()})

    def at_h(self, value) -> "HTPoly":
        """Evaluate h at a nonzero rational."""
        v = to_fraction(value)
        if not v:
            raise ZeroDivisionError("h must be nonzero")
        out: dict = {}
        for (te, he), c in self.terms.items():
            k = (te, 0)
            out[k] = out.get(k, 0) + c * v ** he
        return HTPoly._raw(self.nt, {k: c for k, c in out.items() if c})

    def at_t(self, t_values) -> "HTPoly":
        """Evaluate the t-variables; keeps the h-dependence."""
        vals = [to_fraction(v) for v in t_values]
        out: dict = {}
        for (te, he), c in self.terms.items():
            x = c
            for v, k in zip(vals, te):
                x *= v ** k
            key = ((0,) * self.nt, he)
            out[key] = out.get(key, 0) + x
        return HTPoly._raw(self.nt, {k: c for k, c in out.items() if c})

    def h_exponents(self) -> set[int]:
        return {he for _, he in self.terms}

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1]), reverse=True)

    def to_json(self) -> list:
        return [{"coeff": str(c), "t": list(te), "h": he} for (te, he), c in self.sorted_terms()]

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for (te, he), c in self.sorted_terms():
            m = [f"t{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(te) if k]
            if he:
                m.append(f"h^{he}" if he != 1 else "h")
            bits.append(str(c) + ("*" + "*".join(m) if m else ""))
        return " + ".join(bits)


def multi_indices(l: int, max_total: int) -> list[tuple[int, ...]]:
    """All d >= 0 with |d| <= max_total, ordered by |d| then lexicographically."""
    out = [()]
    for _ in range(l):
        out = [e + (k,) for e in out for k in range(max_total + 1)]
    out = [e for e in out if sum(e) <= max_total]
    return sorted(out, key=lambda e: (sum(e), e))


class ScalarSeries:
    """sum_d g_d(t, h) e^{t.d}, truncated at |d| <= order."""

    __slots__ = ("nt", "order", "coeffs")

    def __init__(self, nt: int, order: int, coeffs: Mapping[tuple[int, ...], HTPoly] | None = None):
        self.nt = nt
        self.order = order
        self.coeffs = {tuple(d): p for d, p in (coeffs or {}).items() if sum(d) <= order and p}

    def __getitem__(self, d) -> HTPoly:
        return self.coeffs.get(tuple(d), HTPoly(self.nt))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        return (isinstance(other, ScalarSeries) and self.nt == other.nt
                and self.order == other.order and self.coeffs == other.coeffs)

    def __add__(self, other: "ScalarSeries") -> "ScalarSeries":
        order = min(self.order, other.order)
        keys = set(self.coeffs) | set(other.coeffs)
        return ScalarSeries(self.nt, order, {d: self[d] + other[d] for d in keys})

    def __neg__(self):
        return ScalarSeries(self.nt, self.order, {d: -p for d, p in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def truncate(self, order: int) -> "ScalarSeries":
        return ScalarSeries(self.nt, min(order, self.order), self.coeffs)

    def at_h(self, value) -> "ScalarSeries":
        return ScalarSeries(self.nt, self.order, {d: p.at_h(value) for d, p in self.coeffs.items()})

    def nonzero_degrees(self) -> list[tuple[int, ...]]:
        return sorted(self.coeffs, key=lambda d: (sum(d), d))

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "coeffs": [{"d": list(d), "poly": self.coeffs[d].to_json()} for d in self.nonzero_degrees()],
        }

    def __repr__(self):
        return " + ".join(f"({self.coeffs[d]})*e^{list(d)}" for d in self.nonzero_degrees()) or "0"


def vec_zero(nt: int, n: int) -> list[HTPoly]:
    return [HTPoly(nt) for _ in range(n)]


def vec_is_zero(v: Iterable[HTPoly]) -> bool:
    return all(p.is_zero() for p in v)
