"""
End-to-end run: root system -> invariants -> Toda lifts -> F_k/f_k split ->
operator commutators -> hypotheses on the quantum Chevalley matrices ->
relations -> formal flat sections.

Stage failures are recorded in the report rather than raised.  Timings are
kept on the report object but left out of its JSON so reruns give the same
bytes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import prod

from .diffop import build_H, commutator_diffop, exp_free_part, h_zero_symbol, diffop_poly_vars, rho_Dk
from .exactalg import SparsePoly, to_fraction
from .flatsec import (PreconditionError, annihilation_check, flat_residuals, divisor_pairing_check,
                      gram_certificate, solve_flat_section)
from .invariants import chevalley_generators, is_invariant, jacobian_determinant
from .qcoh import (Check, QMatrix, SchubertBasis, borel_check, check_nilpotent, classical_chevalley,
                   divisor_matrices, dual_operators, relation_polynomial, verify_hypotheses, verify_relations)
from .rootsys import build_root_system, weyl_generate
from .toda import build_Omega, commutator_uenv, poisson_bracket, toda_integrals

FAULTS = ("grading", "classical", "commute", "v", "vi", "divisor", "triangular", "corrupt-B")


class UnknownFault(ValueError):
    pass


class Context:
    """Lazily computed objects for one (type, rank)."""

    def __init__(self, letter: str, rank: int, fault: str | None = None):
        if fault is not None and fault not in FAULTS:
            raise UnknownFault(f"unknown fault {fault!r}; choose from {', '.join(FAULTS)}")
        self.rs = build_root_system(letter, rank)
        self.fault = fault

    @cached_property
    def W(self):
        return weyl_generate(self.rs)

    @cached_property
    def basis(self) -> SchubertBasis:
        return SchubertBasis.from_weyl(self.W)

    @cached_property
    def invariants(self):
        return chevalley_generators(self.rs, self.W)

    @cached_property
    def integrals(self):
        return toda_integrals(self.rs, self.invariants)

    @cached_property
    def H(self):
        return build_H(self.rs)

    @cached_property
    def operators(self):
        return [rho_Dk(t.omega, self.rs, t.degree) for t in self.integrals]

    @cached_property
    def classical(self) -> list[QMatrix]:
        return [classical_chevalley(self.rs, self.W, i, self.basis) for i in range(self.rs.rank)]

    @cached_property
    def Bs(self) -> list[QMatrix]:
        Bs = divisor_matrices(self.rs, self.W)
        return inject_fault(self.fault, Bs, self.basis) if self.fault else Bs


def _edit(B: QMatrix, fn) -> QMatrix:
    return QMatrix(B.n, B.vs, {rc: fn(rc, p) for rc, p in B.entries.items()})


def _first_entry(B: QMatrix, quantum: bool):
    for rc, p in B.sorted_entries():
        if any(any(e) for e in p.terms) == quantum:
            return rc
    raise UnknownFault("matrix has no entry of the requested kind")


def inject_fault(key: str, Bs: list[QMatrix], basis: SchubertBasis) -> list[QMatrix]:
    """Deliberately break the quantum Chevalley matrices (negative controls)."""
    Bs = list(Bs)
    vs = Bs[0].vs
    l = len(Bs)
    if key == "grading":
        rc = _first_entry(Bs[0], True)
        Bs[0] = _edit(Bs[0], lambda k, p: p * vs.var(0) if k == rc else p)
    elif key == "classical":
        rc = _first_entry(Bs[0], False)
        Bs[0] = _edit(Bs[0], lambda k, p: p + _q_free(p) if k == rc else p)
    elif key == "commute":
        if l < 2:
            raise UnknownFault("commutation fault needs rank >= 2")
        rc = _first_entry(Bs[-1], False)
        Bs[-1] = _edit(Bs[-1], lambda k, p: p + _q_free(p) if k == rc else p)
    elif key in ("v", "corrupt-B"):
        Bs[0] = _edit(Bs[0], lambda k, p: p + (p - _q_free(p)))
    elif key == "vi":
        # a q-term in B_1 with a q_l factor that B_l does not mirror
        rc = _first_entry(Bs[0], True)
        extra = vs.var(l - 1) if l > 1 else vs.var(0)
        Bs[0] = _edit(Bs[0], lambda k, p: p + (p - _q_free(p)) * extra if k == rc else p)
    elif key == "divisor":
        if l < 2:
            raise UnknownFault("divisor fault needs rank >= 2")
        swap = {0: vs.var(1), 1: vs.var(0)}
        Bs[0] = _edit(Bs[0], lambda k, p: p.substitute({**{i: vs.var(i) for i in range(l)}, **swap}, vs))
    elif key == "triangular":
        n = Bs[0].n
        entries = dict(Bs[0].entries)
        key_rc = (n - 1, 0)
        entries[key_rc] = entries.get(key_rc, vs.zero()) + vs.one()
        Bs[0] = QMatrix(n, vs, entries)
    else:
        raise UnknownFault(f"unknown fault {key!r}")
    return Bs


def _q_free(p: SparsePoly) -> SparsePoly:
    return SparsePoly(p.vs, {e: c for e, c in p.terms.items() if not any(e)})


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class Stage:
    name: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        out = {"stage": self.name, "pass": self.passed, "checks": [c.to_json() for c in self.checks]}
        if self.data:
            out["data"] = self.data
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class PipelineReport:
    type: str
    rank: int
    order: int
    stages: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    fault: str | None = None
    h_value: Fraction | None = None

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.stages)

    def stage(self, name: str) -> Stage:
        return next(s for s in self.stages if s.name == name)

    def failed_checks(self) -> list[str]:
        return [f"{s.name}/{c.name}" for s in self.stages for c in s.checks if not c.passed] + \
            [f"{s.name}/error" for s in self.stages if s.error is not None]

    def to_json(self, with_timings: bool = False) -> dict:
        out = {
            "type": self.type,
            "rank": self.rank,
            "order": self.order,
            "pass": self.passed,
            "stages": [s.to_json() for s in self.stages],
        }
        if self.fault:
            out["fault_inject"] = self.fault
        if self.h_value is not None:
            out["h_value"] = str(self.h_value)
        if with_timings:
            out["timings"] = {k: round(v, 3) for k, v in self.timings.items()}
        return out


def _ok(name: str, passed: bool, failures=None, **details) -> Check:
    return Check(name, bool(passed), list(failures or []), details)


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------

def stage_root_system(ctx: Context) -> Stage:
    rs, W = ctx.rs, ctx.W
    minors = rs.gram_minors()
    degrees = ctx.invariants.degrees
    return Stage("root_system", [
        _ok("gram_positive_definite", all(m > 0 for m in minors), minors=[str(m) for m in minors]),
        _ok("weyl_order_is_degree_product", W.order == prod(degrees), order=W.order, degrees=list(degrees)),
    ], {"cartan": [list(r) for r in rs.cartan], "n_positive": rs.n_positive})


def stage_invariants(ctx: Context) -> Stage:
    inv = ctx.invariants
    bad = [k + 1 for k, u in enumerate(inv) if not is_invariant(u, ctx.W)]
    jac = jacobian_determinant(list(inv))
    return Stage("invariants", [
        _ok("invariant", not bad, [{"k": k} for k in bad]),
        _ok("homogeneous", all(u.is_homogeneous() and u.degree() == d for u, d in zip(inv, inv.degrees))),
        _ok("jacobian", not jac.is_zero() and jac.degree() == ctx.rs.n_positive,
            jacobian_degree=jac.degree() if not jac.is_zero() else None),
    ], {"u": [u.to_json() for u in inv]})


def stage_toda_solve(ctx: Context) -> Stage:
    omega = build_Omega(ctx.rs)
    fails, pair_fails = [], []
    tis = ctx.integrals
    for t in tis:
        if not commutator_uenv(t.omega, omega).is_zero():
            fails.append({"k": t.k})
    for a in range(len(tis)):
        for b in range(a + 1, len(tis)):
            if not commutator_uenv(tis[a].omega, tis[b].omega).is_zero():
                pair_fails.append({"pair": [a + 1, b + 1]})
    return Stage("toda_solve", [
        _ok("commutes_with_omega", not fails, fails),
        _ok("pairwise_commuting", not pair_fails, pair_fails),
    ], {"omega": [t.omega.to_json() for t in tis]})


def stage_toda_split(ctx: Context) -> Stage:
    tis = ctx.integrals
    F1 = tis[0].F
    l = ctx.rs.rank
    no_q = [t.k for t in tis if any(not any(e[:l]) for e in t.f.terms)]
    brackets = [t.k for t in tis if not poisson_bracket(t.F, F1).is_zero()]
    return Stage("toda_split", [
        _ok("lower_order_carries_Q", not no_q, [{"k": k} for k in no_q]),
        _ok("poisson_commutes_with_F1", not brackets, [{"k": k} for k in brackets]),
    ], {
        "F": [t.F.to_json() for t in tis],
        "f": [t.f.to_json() for t in tis],
        "relations": [relation_polynomial(t.F, ctx.rs).to_json() for t in tis],
    })


def _u_at_2L(u: SparsePoly, rank: int) -> SparsePoly:
    vs = diffop_poly_vars(rank)
    return u.substitute({i: vs.var(rank + i).scale(2) for i in range(rank)}, vs)


def _scaled_F(F: SparsePoly, rs, degree: int) -> SparsePoly:
    l = rs.rank
    vs = diffop_poly_vars(l)
    mapping = {i: vs.var(i).scale(-rs.gram[i][i]) for i in range(l)}
    mapping.update({l + i: vs.var(l + i) for i in range(l)})
    return F.substitute(mapping, vs).scale(Fraction(2) ** degree)


def stage_commutators(ctx: Context) -> Stage:
    H = ctx.H
    comm, homog, efree, hfree, symbol = [], [], [], [], []
    l = ctx.rs.rank
    for t, D in zip(ctx.integrals, ctx.operators):
        if not commutator_diffop(D, H).is_zero():
            comm.append({"k": t.k})
        if not D.is_homogeneous(t.degree):
            homog.append({"k": t.k, "grades": sorted(D.grades())})
        e0 = exp_free_part(D)
        if any(e[-1] for e in e0.terms):
            hfree.append({"k": t.k})
        if e0 != _u_at_2L(t.u, l):
            efree.append({"k": t.k})
        if h_zero_symbol(D) != _scaled_F(t.F, ctx.rs, t.degree):
            symbol.append({"k": t.k})
    return Stage("commutators", [
        _ok("commutes_with_H", not comm, comm),
        _ok("homogeneous", not homog, homog),
        _ok("exp_free_part_is_h_free", not hfree, hfree),
        _ok("exp_free_part_is_u_of_2L", not efree, efree),
        _ok("h_zero_symbol_is_scaled_F", not symbol, symbol),
    ], {"H": H.to_json(), "D": [D.to_json() for D in ctx.operators]})


def stage_hypotheses(ctx: Context) -> Stage:
    checks = verify_hypotheses(ctx.Bs, ctx.rs, ctx.W)
    checks.append(check_nilpotent(ctx.Bs, ctx.rs.n_positive))
    return Stage("hypotheses", checks, {
        "basis": ctx.basis.to_json(ctx.W),
        "B": [B.to_json() for B in ctx.Bs],
    })


def stage_relations(ctx: Context) -> Stage:
    checks = verify_relations([t.F for t in ctx.integrals], ctx.Bs, ctx.rs, ctx.W)
    checks += borel_check(list(ctx.invariants), ctx.classical)
    return Stage("relations", checks)


def stage_flat_sections(ctx: Context, order: int, h_value=None) -> Stage:
    st = Stage("flat_sections")
    cert = gram_certificate(ctx.rs, order)
    st.checks.append(_ok("gram_certificate", cert["positive_definite"] and cert["all_positive"],
                         minors=[str(m) for m in cert["minors"]]))
    As = dual_operators(ctx.Bs)
    n = len(ctx.basis)
    hv = to_fraction(h_value) if h_value is not None else None

    def nonzero(series) -> bool:
        return not (series.at_h(hv) if hv is not None else series).is_zero()

    residual, annihil, ops, ident = [], [], [], []
    for k in range(n):
        a = [int(j == k) for j in range(n)]
        try:
            s = solve_flat_section(As, a, order, check=(k == 0))
        except PreconditionError as exc:
            st.error = str(exc)
            return st
        for i, r in enumerate(flat_residuals(As, s)):
            if nonzero(r):
                residual.append({"a": k, "i": i + 1, "degrees": [list(d) for d in sorted(r.coeffs)]})
        g = annihilation_check(ctx.H, s, ctx.basis)
        if nonzero(g):
            annihil.append({"a": k, "degrees": [list(d) for d in g.nonzero_degrees()]})
        for t, D in zip(ctx.integrals, ctx.operators):
            g = annihilation_check(D, s, ctx.basis)
            if nonzero(g):
                ops.append({"a": k, "k": t.k, "degrees": [list(d) for d in g.nonzero_degrees()]})
        for j in range(ctx.rs.rank):
            f = [0] * n
            f[ctx.basis.position[ctx.W.index[ctx.W.simple_reflection(j)]]] = 1
            g = divisor_pairing_check(ctx.H, s, f, ctx.Bs)
            if nonzero(g):
                ident.append({"a": k, "j": j + 1})
    st.checks += [
        _ok("flat_residual", not residual, residual),
        _ok("H_annihilates", not annihil, annihil),
        _ok("D_annihilates", not ops, ops),
        _ok("divisor_pairing_identity", not ident, ident),
    ]
    return st


STAGES = ("root_system", "invariants", "toda_solve", "toda_split", "commutators",
          "hypotheses", "relations", "flat_sections")


def run_pipeline(letter: str, rank: int, order: int = 3, fault: str | None = None,
                 h_value=None, stages=STAGES) -> PipelineReport:
    ctx = Context(letter, rank, fault)
    report = PipelineReport(ctx.rs.letter, rank, order, fault=fault,
                            h_value=to_fraction(h_value) if h_value is not None else None)
    runners = {
        "root_system": stage_root_system,
        "invariants": stage_invariants,
        "toda_solve": stage_toda_solve,
        "toda_split": stage_toda_split,
        "commutators": stage_commutators,
        "hypotheses": stage_hypotheses,
        "relations": stage_relations,
        "flat_sections": lambda c: stage_flat_sections(c, order, h_value),
    }
    for name in STAGES:
        if name not in stages:
            continue
        t0 = time.perf_counter()
        try:
            st = runners[name](ctx)
        except Exception as exc:  # recorded, not raised
            st = Stage(name, error=f"{type(exc).__name__}: {exc}")
        report.timings[name] = time.perf_counter() - t0
        report.stages.append(st)
    return report
