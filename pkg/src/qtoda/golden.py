"""
Checked-in reference outputs (Omega_k, F_k, B_i) for A1, A2 and B2.

``check`` recomputes and compares byte for byte; ``regenerate`` rewrites the
files and is only reached through an explicit CLI flag.
"""

from __future__ import annotations

from pathlib import Path

from .flatsec import pair_with_one, solve_flat_section
from .qcoh import dual_operators
from .pipeline import Context
from .serial import canonical_dumps

FIXTURE_DIR = Path(__file__).parent / "fixtures"
GOLDEN_TYPES = (("A", 1), ("A", 2), ("B", 2))


def fixture_payload(letter: str, rank: int) -> dict:
    ctx = Context(letter, rank)
    out = {
        "type": letter,
        "rank": rank,
        "u": [u.to_json() for u in ctx.invariants],
        "omega": [t.omega.to_json() for t in ctx.integrals],
        "F": [t.F.to_json() for t in ctx.integrals],
        "f": [t.f.to_json() for t in ctx.integrals],
        "B": [B.to_json() for B in ctx.Bs],
    }
    if rank == 1:
        # flat section for the class dual to the identity, truncated at degree 2
        n = len(ctx.basis)
        a = [int(j == ctx.basis.identity_position) for j in range(n)]
        s = solve_flat_section(dual_operators(ctx.Bs), a, 2)
        out["flat_section_order_2"] = s.to_json()
        out["pair_with_one_order_2"] = pair_with_one(s, ctx.basis).to_json()
    return out


def fixture_path(letter: str, rank: int) -> Path:
    return FIXTURE_DIR / f"{letter}{rank}.json"


def load_fixture(letter: str, rank: int) -> str:
    return fixture_path(letter, rank).read_text()


def check() -> list[str]:
    """Names of fixtures that are missing or differ from a fresh computation."""
    bad = []
    for letter, rank in GOLDEN_TYPES:
        path = fixture_path(letter, rank)
        if not path.exists() or path.read_text() != canonical_dumps(fixture_payload(letter, rank)):
            bad.append(path.name)
    return bad


def regenerate() -> list[Path]:
    FIXTURE_DIR.mkdir(exist_ok=True)
    written = []
    for letter, rank in GOLDEN_TYPES:
        path = fixture_path(letter, rank)
        path.write_text(canonical_dumps(fixture_payload(letter, rank)))
        written.append(path)
    return written
