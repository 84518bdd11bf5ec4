"""
Divisor operators on H*(G/B) in the Schubert basis, classical and quantum,
and exact checks of the hypotheses on a product given only through them.

Matrix convention: ``B[v, w]`` is the coefficient of sigma_v in
[lambda_i] o sigma_w (columns are inputs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exactalg import SparsePoly, VarSet, to_fraction
from .rootsys import RootSystem, WeylGroup, _matmul, reflection_matrix


def q_vars(rank: int) -> VarSet:
    return VarSet.make([f"q{i + 1}" for i in range(rank)], [4] * rank)


def relation_vars(rank: int) -> VarSet:
    """Generators of the quantum ring: q_i (degree 4) and [lambda_i] (degree 2)."""
    return VarSet.make([f"q{i + 1}" for i in range(rank)] + [f"l{i + 1}" for i in range(rank)],
                       [4] * rank + [2] * rank)


@dataclass(frozen=True)
class SchubertBasis:
    """Weyl elements ordered by decreasing length, ties by element index."""

    order: tuple[int, ...]              # position -> Weyl element index
    lengths: tuple[int, ...]            # per position
    position: dict = field(compare=False, hash=False)

    @classmethod
    def from_weyl(cls, W: WeylGroup) -> "SchubertBasis":
        order = tuple(sorted(range(W.order), key=lambda k: (-W.lengths[k], k)))
        return cls(order, tuple(W.lengths[k] for k in order), {k: p for p, k in enumerate(order)})

    def __len__(self) -> int:
        return len(self.order)

    @property
    def identity_position(self) -> int:
        return self.position[0]

    @property
    def top_position(self) -> int:
        return 0

    def to_json(self, W: WeylGroup) -> list:
        return [{"element": k, "length": W.lengths[k], "word": [i + 1 for i in W.words[k]]} for k in self.order]


class QMatrix:
    """Sparse square matrix with entries in Q[q_1..q_l]."""

    __slots__ = ("n", "vs", "entries")

    def __init__(self, n: int, vs: VarSet, entries: Mapping[tuple[int, int], SparsePoly] | None = None):
        self.n = n
        self.vs = vs
        self.entries = {}
        for (r, c), p in (entries or {}).items():
            if not (0 <= r < n and 0 <= c < n):
                raise IndexError((r, c))
            if isinstance(p, (int, Fraction)):
                p = vs.const(p)
            if p.vs != vs:
                raise ValueError("entry lives in the wrong ring")
            if not p.is_zero():
                self.entries[(r, c)] = p

    @classmethod
    def identity(cls, n: int, vs: VarSet) -> "QMatrix":
        return cls(n, vs, {(i, i): vs.one() for i in range(n)})

    @classmethod
    def scalar(cls, n: int, p: SparsePoly) -> "QMatrix":
        return cls(n, p.vs, {(i, i): p for i in range(n)})

    def __getitem__(self, rc) -> SparsePoly:
        return self.entries.get(rc, self.vs.zero())

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other):
        return isinstance(other, QMatrix) and self.n == other.n and self.entries == other.entries

    def __add__(self, other: "QMatrix") -> "QMatrix":
        out = dict(self.entries)
        for k, p in other.entries.items():
            out[k] = out[k] + p if k in out else p
        return QMatrix(self.n, self.vs, out)

    def __neg__(self):
        return QMatrix(self.n, self.vs, {k: -p for k, p in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale_poly(self, p: SparsePoly) -> "QMatrix":
        if p.is_zero():
            return QMatrix(self.n, self.vs)
        return QMatrix(self.n, self.vs, {k: v * p for k, v in self.entries.items()})

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        rows: dict[int, list] = {}
        for (k, c), p in other.entries.items():
            rows.setdefault(k, []).append((c, p))
        out: dict = {}
        for (r, k), p in self.entries.items():
            for c, p2 in rows.get(k, ()):
                prod = p * p2
                out[(r, c)] = out[(r, c)] + prod if (r, c) in out else prod
        return QMatrix(self.n, self.vs, out)

    def apply(self, vec: Sequence[SparsePoly]) -> list[SparsePoly]:
        out = [self.vs.zero() for _ in range(self.n)]
        for (r, c), p in self.entries.items():
            if not vec[c].is_zero():
                out[r] = out[r] + p * vec[c]
        return out

    def transpose(self) -> "QMatrix":
        return QMatrix(self.n, self.vs, {(c, r): p for (r, c), p in self.entries.items()})

    def at_q_zero(self) -> "QMatrix":
        z = (0,) * self.vs.n
        return QMatrix(self.n, self.vs, {k: self.vs.const(p.coeff(z)) for k, p in self.entries.items()})

    def quantum_part(self) -> "QMatrix":
        return self - self.at_q_zero()

    def euler(self, i: int) -> "QMatrix":
        """q_i d/dq_i, i.e. d/dt_i under q_i = e^{t_i}."""
        return QMatrix(self.n, self.vs, {k: p.euler(i) for k, p in self.entries.items()})

    def coefficient_matrices(self) -> dict[tuple[int, ...], dict[tuple[int, int], Fraction]]:
        """Split into {q-exponent: constant sparse matrix}."""
        out: dict = {}
        for rc, p in self.entries.items():
            for e, c in p.terms.items():
                out.setdefault(e, {})[rc] = c
        return out

    def sorted_entries(self):
        return sorted(self.entries.items())

    def to_json(self) -> dict:
        return {
            "size": self.n,
            "vars": list(self.vs.names),
            "weights": list(self.vs.weights),
            "entries": [{"row": r, "col": c, "poly": [{"coeff": str(k), "exps": list(e)} for e, k in p.sorted_terms()]}
                        for (r, c), p in self.sorted_entries()],
        }

    @classmethod
    def from_json(cls, data) -> "QMatrix":
        vs = VarSet.make(data["vars"], data["weights"])
        entries = {}
        for ent in data["entries"]:
            key = (int(ent["row"]), int(ent["col"]))
            if key in entries:
                raise ValueError(f"duplicate entry {key}")
            entries[key] = SparsePoly(vs, {tuple(t["exps"]): to_fraction(t["coeff"]) for t in ent["poly"]})
        return cls(int(data["size"]), vs, entries)

    def __repr__(self):
        return f"QMatrix({self.n}x{self.n}, {len(self.entries)} nonzero)"


def _chevalley(rs: RootSystem, W: WeylGroup, basis: SchubertBasis, i: int, quantum: bool) -> QMatrix:
    vs = q_vars(rs.rank)
    refl = [reflection_matrix(rs, b) for b in rs.positive_roots]
    entries: dict = {}
    for w_pos, w in enumerate(basis.order):
        lw = W.lengths[w]
        for b, cor, s in zip(rs.positive_roots, rs.positive_coroots, refl):
            coef = cor[i]  # lambda_i(beta^vee)
            if not coef:
                continue
            v = W.index[_matmul(W.elements[w], s)]
            lv = W.lengths[v]
            v_pos = basis.position[v]
            if lv == lw + 1:
                entries[(v_pos, w_pos)] = entries.get((v_pos, w_pos), vs.zero()) + vs.const(coef)
            elif quantum and lv == lw + 1 - 2 * sum(cor):
                term = vs.monomial(cor, coef)
                entries[(v_pos, w_pos)] = entries.get((v_pos, w_pos), vs.zero()) + term
    return QMatrix(len(basis), vs, entries)


def classical_chevalley(rs: RootSystem, W: WeylGroup, i: int, basis: SchubertBasis | None = None) -> QMatrix:
    """Multiplication by [lambda_i] = sigma_{s_i} in H*(G/B) (Chevalley's formula)."""
    return _chevalley(rs, W, basis or SchubertBasis.from_weyl(W), i, quantum=False)


class ChevalleyConsistencyError(RuntimeError):
    pass


def quantum_chevalley(rs: RootSystem, W: WeylGroup, i: int, basis: SchubertBasis | None = None) -> QMatrix:
    """[lambda_i] o in the small quantum ring (quantum Chevalley formula).

    The divisor columns are checked against
    [lambda_i] o [lambda_j] = [lambda_i][lambda_j] + delta_ij q_j.
    """
    basis = basis or SchubertBasis.from_weyl(W)
    B = _chevalley(rs, W, basis, i, quantum=True)
    C = _chevalley(rs, W, basis, i, quantum=False)
    e_pos = basis.identity_position
    vs = B.vs
    for j in range(rs.rank):
        col = basis.position[W.index[W.simple_reflection(j)]]
        for r in range(len(basis)):
            expected = C[(r, col)]
            if r == e_pos and i == j:
                expected = expected + vs.var(j)
            if B[(r, col)] != expected:
                raise ChevalleyConsistencyError(f"divisor column s_{j + 1} of B_{i + 1} disagrees at row {r}")
    return B


def divisor_matrices(rs: RootSystem, W: WeylGroup, quantum: bool = True) -> list[QMatrix]:
    basis = SchubertBasis.from_weyl(W)
    f = quantum_chevalley if quantum else classical_chevalley
    return [f(rs, W, i, basis) for i in range(rs.rank)]


def pairing_data(W: WeylGroup, basis: SchubertBasis | None = None):
    """Poincare pairing (sigma_v, sigma_w) = delta_{w, w0 v} in basis positions,
    and the permutation sending sigma_v to its dual sigma_{w0 v}."""
    basis = basis or SchubertBasis.from_weyl(W)
    w0 = W.longest_index
    n = len(basis)
    dual = [basis.position[W.mul(w0, v)] for v in basis.order]
    P = [[int(dual[r] == c) for c in range(n)] for r in range(n)]
    return P, dual


def dual_operators(Bs: Sequence[QMatrix]) -> list[QMatrix]:
    """A_i: matrix of ([lambda_i] o)^T in the dual basis, i.e. B_i transposed."""
    return [B.transpose() for B in Bs]


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"name": self.name, "pass": self.passed, "failures": self.failures}
        if self.details:
            out["details"] = self.details
        return out


def _fail(failures: list, **info):
    if len(failures) < 20:
        failures.append(info)


def _poly_str(p: SparsePoly) -> str:
    return repr(p)


def check_grading(Bs, basis: SchubertBasis) -> Check:
    fails: list = []
    for i, B in enumerate(Bs):
        for (r, c), p in B.sorted_entries():
            for e in p.terms:
                if 2 * basis.lengths[r] + 4 * sum(e) != 2 * basis.lengths[c] + 2:
                    _fail(fails, matrix=i + 1, row=r, col=c, exps=list(e))
    return Check("grading", not fails, fails)


def check_classical_limit(Bs, classical) -> Check:
    fails: list = []
    for i, (B, C) in enumerate(zip(Bs, classical)):
        diff = B.at_q_zero() - C
        for (r, c), p in diff.sorted_entries():
            _fail(fails, matrix=i + 1, row=r, col=c, residual=_poly_str(p))
    return Check("classical_limit", not fails, fails)


def check_commutation(Bs) -> Check:
    fails: list = []
    for i in range(len(Bs)):
        for j in range(i + 1, len(Bs)):
            comm = Bs[i] @ Bs[j] - Bs[j] @ Bs[i]
            for (r, c), p in comm.sorted_entries():
                _fail(fails, pair=[i + 1, j + 1], row=r, col=c, residual=_poly_str(p))
    return Check("commutation", not fails, fails)


def check_quadratic_identity(Bs, rs: RootSystem, basis: SchubertBasis) -> Check:
    """(sum G_ij B_i B_j) e_1 = (sum G_ii q_i) e_1, e_1 the identity class."""
    n = len(basis)
    vs = Bs[0].vs
    e1 = [vs.zero() for _ in range(n)]
    e1[basis.identity_position] = vs.one()
    l = rs.rank
    lhs = [vs.zero() for _ in range(n)]
    for i in range(l):
        Bj_e = [Bs[j].apply(e1) for j in range(l)]
        for j in range(l):
            if rs.gram[i][j]:
                v = Bs[i].apply(Bj_e[j])
                lhs = [a + b.scale(rs.gram[i][j]) for a, b in zip(lhs, v)]
    rhs_scalar = sum((vs.var(i).scale(rs.gram[i][i]) for i in range(l)), vs.zero())
    rhs = [x * rhs_scalar for x in e1]
    fails: list = []
    for r in range(n):
        if lhs[r] != rhs[r]:
            _fail(fails, row=r, lhs=_poly_str(lhs[r]), rhs=_poly_str(rhs[r]))
    return Check("quadratic_identity", not fails, fails)


def check_flatness(Bs) -> Check:
    fails: list = []
    for i in range(len(Bs)):
        for j in range(i + 1, len(Bs)):
            diff = Bs[j].euler(i) - Bs[i].euler(j)
            for (r, c), p in diff.sorted_entries():
                _fail(fails, pair=[i + 1, j + 1], row=r, col=c, residual=_poly_str(p))
    return Check("flatness", not fails, fails)


def check_divisor(Bs) -> Check:
    """Every quantum term of B_i carries a positive power of q_i."""
    fails: list = []
    for i, B in enumerate(Bs):
        for (r, c), p in B.sorted_entries():
            for e in p.terms:
                if any(e) and e[i] == 0:
                    _fail(fails, matrix=i + 1, row=r, col=c, exps=list(e))
    return Check("divisor", not fails, fails)


def check_triangular(Bs) -> Check:
    """A_i = B_i^T splits as strictly lower q-free plus strictly upper q_i-divisible."""
    fails: list = []
    for i, A in enumerate(dual_operators(Bs)):
        for (r, c), p in A.sorted_entries():
            for e in p.terms:
                if not any(e):
                    if not r > c:
                        _fail(fails, matrix=i + 1, row=r, col=c, part="A'", exps=list(e))
                elif not (r < c and e[i] > 0):
                    _fail(fails, matrix=i + 1, row=r, col=c, part="A''", exps=list(e))
    return Check("triangular_split", not fails, fails)


def check_nilpotent(Bs, n_positive: int) -> Check:
    fails: list = []
    for i, A in enumerate(dual_operators(Bs)):
        A0 = A.at_q_zero()
        P = QMatrix.identity(A.n, A.vs)
        for _ in range(n_positive + 1):
            P = P @ A0
        if not P.is_zero():
            _fail(fails, matrix=i + 1)
    return Check("nilpotent", not fails, fails)


HYPOTHESES = ("grading", "classical_limit", "commutation", "quadratic_identity",
              "flatness", "divisor", "triangular_split")


def verify_hypotheses(Bs: Sequence[QMatrix], rs: RootSystem, W: WeylGroup) -> list[Check]:
    basis = SchubertBasis.from_weyl(W)
    classical = [classical_chevalley(rs, W, i, basis) for i in range(rs.rank)]
    return [
        check_grading(Bs, basis),
        check_classical_limit(Bs, classical),
        check_commutation(Bs),
        check_quadratic_identity(Bs, rs, basis),
        check_flatness(Bs),
        check_divisor(Bs),
        check_triangular(Bs),
    ]


# ---------------------------------------------------------------------------
# Evaluating polynomials on commuting matrices
# ---------------------------------------------------------------------------

class MatrixPowers:
    """Caches monomials B^J in commuting matrices."""

    def __init__(self, mats: Sequence[QMatrix]):
        self.mats = list(mats)
        n, vs = mats[0].n, mats[0].vs
        self.cache = {(0,) * len(mats): QMatrix.identity(n, vs)}

    def __call__(self, J: tuple[int, ...]) -> QMatrix:
        if J not in self.cache:
            i = max(k for k, x in enumerate(J) if x)
            prev = J[:i] + (J[i] - 1,) + J[i + 1:]
            self.cache[J] = self(prev) @ self.mats[i]
        return self.cache[J]


def evaluate_lambda_poly(u: SparsePoly, mats: Sequence[QMatrix], powers: MatrixPowers | None = None) -> QMatrix:
    """u(B_1, ..., B_l) for a polynomial in the lambdas."""
    powers = powers or MatrixPowers(mats)
    out = QMatrix(mats[0].n, mats[0].vs)
    for e, c in u.sorted_terms():
        out = out + powers(e).scale_poly(mats[0].vs.const(c))
    return out


def evaluate_F(F: SparsePoly, rs: RootSystem, Bs: Sequence[QMatrix], powers: MatrixPowers | None = None) -> QMatrix:
    """F_k({-G_ii q_i}, {B_i}); F is in the variables (Q_1..Q_l, L_1..L_l)."""
    l = rs.rank
    vs = Bs[0].vs
    powers = powers or MatrixPowers(Bs)
    grouped: dict[tuple, SparsePoly] = {}
    for e, c in F.terms.items():
        Qe, Je = e[:l], e[l:]
        scal = vs.const(c)
        for i, k in enumerate(Qe):
            if k:
                scal = scal * vs.monomial(tuple(k if m == i else 0 for m in range(l)), (-rs.gram[i][i]) ** k)
        grouped[Je] = grouped[Je] + scal if Je in grouped else scal
    out = QMatrix(Bs[0].n, vs)
    for Je in sorted(grouped):
        out = out + powers(Je).scale_poly(grouped[Je])
    return out


def relation_polynomial(F: SparsePoly, rs: RootSystem) -> SparsePoly:
    """F_k({-G_ii q_i}, {l_i}) as a polynomial in (q, l)."""
    l = rs.rank
    vs = relation_vars(l)
    mapping = {}
    for i in range(l):
        mapping[i] = vs.var(i).scale(-rs.gram[i][i])
        mapping[l + i] = vs.var(l + i)
    return F.substitute(mapping, vs)


def verify_relations(Fs: Sequence[SparsePoly], Bs: Sequence[QMatrix], rs: RootSystem, W: WeylGroup) -> list[Check]:
    basis = SchubertBasis.from_weyl(W)
    e_pos = basis.identity_position
    powers = MatrixPowers(Bs)
    checks = []
    for k, F in enumerate(Fs, start=1):
        R = evaluate_F(F, rs, Bs, powers)
        fails: list = []
        for (r, c), p in R.sorted_entries():
            _fail(fails, row=r, col=c, on_identity=(c == e_pos), residual=_poly_str(p))
        on_e = [f for f in fails if f["on_identity"]]
        checks.append(Check(f"relation_{k}", not fails, fails, {"identity_column_zero": not on_e}))
    return checks


def borel_check(us: Iterable[SparsePoly], classical: Sequence[QMatrix]) -> list[Check]:
    powers = MatrixPowers(classical)
    out = []
    for k, u in enumerate(us, start=1):
        R = evaluate_lambda_poly(u, classical, powers)
        fails: list = []
        for (r, c), p in R.sorted_entries():
            _fail(fails, row=r, col=c, residual=_poly_str(p))
        out.append(Check(f"borel_{k}", not fails, fails))
    return out
