"""
Exact arithmetic kernel: rationals, sparse multivariate polynomials and
linear solving over Q.

Everything here is immutable once built.  Coefficients are
:class:`fractions.Fraction`, which reduces eagerly after each operation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence, Union

Rational = Fraction
Number = Union[int, Fraction]


class VariableMismatch(ValueError):
    pass


def to_fraction(x) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def fraction_str(x: Fraction) -> str:
    return str(x)


@dataclass(frozen=True)
class VarSet:
    """Named polynomial variables, each with an integer degree weight."""

    names: tuple[str, ...]
    weights: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.weights):
            raise ValueError("names and weights differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names")

    @classmethod
    def make(cls, names: Sequence[str], weights: Sequence[int] | None = None) -> "VarSet":
        names = tuple(names)
        if weights is None:
            weights = (1,) * len(names)
        return cls(names, tuple(int(w) for w in weights))

    @property
    def n(self) -> int:
        return len(self.names)

    def index(self, var: Union[int, str]) -> int:
        if isinstance(var, int):
            if not 0 <= var < self.n:
                raise IndexError(var)
            return var
        return self.names.index(var)

    def weighted_degree(self, exps: tuple[int, ...]) -> int:
        return sum(w * e for w, e in zip(self.weights, exps))

    def zero(self) -> "SparsePoly":
        return SparsePoly(self, {})

    def const(self, c: Number) -> "SparsePoly":
        return SparsePoly(self, {(0,) * self.n: to_fraction(c)})

    def one(self) -> "SparsePoly":
        return self.const(1)

    def var(self, v: Union[int, str]) -> "SparsePoly":
        i = self.index(v)
        e = [0] * self.n
        e[i] = 1
        return SparsePoly(self, {tuple(e): Fraction(1)})

    def gens(self) -> list["SparsePoly"]:
        return [self.var(i) for i in range(self.n)]

    def monomial(self, exps: Sequence[int], coeff: Number = 1) -> "SparsePoly":
        exps = tuple(int(e) for e in exps)
        if len(exps) != self.n or min(exps, default=0) < 0:
            raise ValueError(f"bad exponent vector {exps} for {self.names}")
        return SparsePoly(self, {exps: to_fraction(coeff)})


def _add_exps(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


class SparsePoly:
    """A polynomial over Q stored as a map exponent-tuple -> nonzero Fraction."""

    __slots__ = ("vs", "terms", "_hash")

    def __init__(self, vs: VarSet, terms: Mapping[tuple[int, ...], Number] | None = None):
        self.vs = vs
        clean = {}
        if terms:
            n = vs.n
            for e, c in terms.items():
                if len(e) != n:
                    raise ValueError(f"exponent {e} does not match {vs.names}")
                c = to_fraction(c)
                if c:
                    clean[tuple(e)] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, vs: VarSet, terms: dict) -> "SparsePoly":
        # terms must already be free of zeros
        p = object.__new__(cls)
        p.vs = vs
        p.terms = terms
        p._hash = None
        return p

    # -- inspection -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def coeff(self, exps: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.coeff((0,) * self.vs.n)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def weighted_degree(self) -> int:
        wd = self.vs.weighted_degree
        return max((wd(e) for e in self.terms), default=-1)

    def is_homogeneous(self, weighted: bool = True) -> bool:
        f = self.vs.weighted_degree if weighted else sum
        return len({f(e) for e in self.terms}) <= 1

    def homogeneous_part(self, deg: int, weighted: bool = True) -> "SparsePoly":
        f = self.vs.weighted_degree if weighted else sum
        return SparsePoly._raw(self.vs, {e: c for e, c in self.terms.items() if f(e) == deg})

    def sort_key(self, exps: tuple[int, ...]):
        return (self.vs.weighted_degree(exps), exps)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms in descending graded-lexicographic order."""
        return sorted(self.terms.items(), key=lambda t: self.sort_key(t[0]), reverse=True)

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "SparsePoly"):
        if self.vs != other.vs:
            raise VariableMismatch(f"{self.vs.names} vs {other.vs.names}")

    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.vs.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return SparsePoly._raw(self.vs, out)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly._raw(self.vs, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Number) -> "SparsePoly":
        c = to_fraction(c)
        if not c:
            return self.vs.zero()
        return SparsePoly._raw(self.vs, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, SparsePoly):
            return NotImplemented
        self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _add_exps(e1, e2)
                out[e] = out.get(e, 0) + c1 * c2
        return SparsePoly._raw(self.vs, {e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int) -> "SparsePoly":
        if n < 0:
            raise ValueError("negative power")
        result = self.vs.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, SparsePoly):
            return self.vs == other.vs and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == self.vs.const(other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vs, frozenset(self.terms.items())))
        return self._hash

    # -- calculus, substitution -------------------------------------------
    def diff(self, var: Union[int, str]) -> "SparsePoly":
        i = self.vs.index(var)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[ne] = c * e[i]
        return SparsePoly._raw(self.vs, out)

    def euler(self, var: Union[int, str]) -> "SparsePoly":
        """``x_i d/dx_i``; on q_i = e^{t_i} this is d/dt_i."""
        i = self.vs.index(var)
        return SparsePoly._raw(self.vs, {e: c * e[i] for e, c in self.terms.items() if e[i]})

    def substitute(self, mapping: Mapping[Union[int, str], "SparsePoly"], target: VarSet | None = None) -> "SparsePoly":
        """Ring homomorphism sending each mapped variable to a polynomial.

        Unmapped variables must exist in ``target`` (by name) and are kept.
        """
        if target is None:
            target = next(iter(mapping.values())).vs if mapping else self.vs
        images = []
        for i, name in enumerate(self.vs.names):
            if i in mapping:
                img = mapping[i]
            elif name in mapping:
                img = mapping[name]
            else:
                if name not in target.names:
                    raise VariableMismatch(f"no image for variable {name}")
                img = target.var(name)
            if isinstance(img, (int, Fraction)):
                img = target.const(img)
            if img.vs != target:
                raise VariableMismatch(f"image of {name} lives in {img.vs.names}")
            images.append(img)
        powers: list[dict[int, SparsePoly]] = [{0: target.one(), 1: img} for img in images]

        def power(i, k):
            cache = powers[i]
            if k not in cache:
                cache[k] = power(i, k - 1) * images[i]
            return cache[k]

        acc: dict = {}
        for e, c in self.terms.items():
            term = target.const(c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            for te, tc in term.terms.items():
                acc[te] = acc.get(te, 0) + tc
        return SparsePoly._raw(target, {e: c for e, c in acc.items() if c})

    def evaluate(self, values: Sequence[Number]) -> Fraction:
        vals = [to_fraction(v) for v in values]
        total = Fraction(0)
        for e, c in self.terms.items():
            t = c
            for v, k in zip(vals, e):
                if k:
                    t *= v ** k
            total += t
        return total

    def reweight(self, vs: VarSet) -> "SparsePoly":
        """Same terms, viewed in a variable set with identical arity."""
        if vs.n != self.vs.n:
            raise VariableMismatch("arity differs")
        return SparsePoly._raw(vs, dict(self.terms))

    # -- display, serialization ------------------------------------------
    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                n if k == 1 else f"{n}^{k}" for n, k in zip(self.vs.names, e) if k
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {
            "vars": list(self.vs.names),
            "weights": list(self.vs.weights),
            "terms": [{"coeff": fraction_str(c), "exps": list(e)} for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SparsePoly":
        vs = VarSet.make(data["vars"], data["weights"])
        terms: dict = {}
        for t in data["terms"]:
            e = tuple(int(x) for x in t["exps"])
            if e in terms:
                raise ValueError(f"duplicate exponent {list(e)}")
            terms[e] = to_fraction(t["coeff"])
        return cls(vs, terms)


def poly_arith(p: SparsePoly, q=None, op: str = "add", *, scalar: Number | None = None,
               mapping: Mapping | None = None, target: VarSet | None = None) -> SparsePoly:
    """Dispatch over the basic polynomial operations by name."""
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    if op == "scale":
        return p.scale(scalar if scalar is not None else q)
    if op == "substitute":
        return p.substitute(mapping if mapping is not None else q, target)
    raise ValueError(f"unknown operation {op!r}")


def binomial_shift(n: int, a: int) -> list[tuple[int, int]]:
    """Coefficients of (x + a)^n as (power, coeff) pairs."""
    return [(k, comb(n, k) * a ** (n - k)) for k in range(n + 1)]


# ---------------------------------------------------------------------------
# Linear algebra over Q
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearSolution:
    status: str  # "unique" | "affine" | "inconsistent"
    particular: tuple[Fraction, ...] | None
    kernel: tuple[tuple[Fraction, ...], ...]
    rank: int

    @property
    def kernel_dimension(self) -> int:
        return len(self.kernel)

    @property
    def consistent(self) -> bool:
        return self.status != "inconsistent"


def solve_sparse(rows: Sequence[Mapping[int, Number]], rhs: Sequence[Number], ncols: int) -> LinearSolution:
    """Solve a sparse system by Gaussian elimination over Q.

    Each row is a dict column -> coefficient.  The pivot in each column is the
    entry of smallest magnitude (ties: sparsest row), which keeps coefficient
    growth down.
    """
    work = []
    for r, b in zip(rows, rhs):
        d = {int(c): to_fraction(v) for c, v in r.items() if v}
        work.append([d, to_fraction(b)])
    if len(rows) != len(rhs):
        raise ValueError("row count and rhs length differ")

    by_col: dict[int, set[int]] = {}
    for k, (d, _) in enumerate(work):
        for c in d:
            by_col.setdefault(c, set()).add(k)

    pivots: list[tuple[int, dict, Fraction]] = []
    used: set[int] = set()
    for col in range(ncols):
        cand = [k for k in by_col.get(col, ()) if k not in used]
        if not cand:
            continue
        p = min(cand, key=lambda k: (abs(work[k][0][col]), len(work[k][0]), k))
        used.add(p)
        prow, pb = work[p]
        inv = 1 / prow[col]
        prow = {c: v * inv for c, v in prow.items()}
        pb = pb * inv
        pivots.append((col, prow, pb))
        for k in cand:
            if k == p:
                continue
            row, b = work[k]
            f = row[col]
            for c, v in prow.items():
                nv = row.get(c, 0) - f * v
                if nv:
                    if c not in row:
                        by_col.setdefault(c, set()).add(k)
                    row[c] = nv
                else:
                    row.pop(c, None)
                    by_col[c].discard(k)
            work[k][1] = b - f * pb
        for c in prow:
            by_col[c].discard(p)

    for k, (d, b) in enumerate(work):
        if k not in used and not d and b:
            return LinearSolution("inconsistent", None, (), len(pivots))

    pivot_cols = {c for c, _, _ in pivots}
    free = [c for c in range(ncols) if c not in pivot_cols]

    def back_substitute(x: list[Fraction], homogeneous: bool):
        for col, prow, pb in reversed(pivots):
            s = Fraction(0) if homogeneous else pb
            for c, v in prow.items():
                if c != col:
                    s -= v * x[c]
            x[col] = s
        return tuple(x)

    particular = back_substitute([Fraction(0)] * ncols, False)
    kernel = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        kernel.append(back_substitute(x, True))
    status = "unique" if not kernel else "affine"
    return LinearSolution(status, particular, tuple(kernel), len(pivots))


def solve_linear(A: Sequence[Sequence[Number]], b: Sequence[Number]) -> LinearSolution:
    """Solve ``A x = b`` exactly; dense front end to :func:`solve_sparse`."""
    ncols = len(A[0]) if A else 0
    rows = [{j: v for j, v in enumerate(r) if v} for r in A]
    return solve_sparse(rows, b, ncols)


def mat_mul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), Fraction(0)) for j in range(len(B[0]))]
            for i in range(len(A))]


def mat_vec(A, v):
    return [sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A]


def identity(n: int):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def mat_inverse(A):
    """Exact inverse, or None when singular."""
    n = len(A)
    cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        sol = solve_linear(A, e)
        if sol.status != "unique":
            return None
        cols.append(sol.particular)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def determinant(A) -> Fraction:
    """Determinant by fraction-based elimination."""
    M = [[to_fraction(x) for x in row] for row in A]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                for k in range(c, n):
                    M[r][k] -= f * M[c][k]
    return det


def leading_minors(A) -> list[Fraction]:
    return [determinant([row[:k] for row in A[:k]]) for k in range(1, len(A) + 1)]


def poly_determinant(M: Sequence[Sequence[SparsePoly]]) -> SparsePoly:
    """Determinant of a small square matrix of polynomials (cofactor expansion)."""
    n = len(M)
    if n == 0:
        raise ValueError("empty matrix")
    if n == 1:
        return M[0][0]
    vs = M[0][0].vs
    total = vs.zero()
    for j in range(n):
        if M[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * poly_determinant(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def matrix_rank(rows: Iterable[Sequence[Number]]) -> int:
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    return solve_linear(rows, [0] * len(rows)).rank
