"""
Root systems and Weyl groups for the simple types A1-A4, B2-B3, C2-C3, D4, G2.

Conventions
-----------
* ``cartan[i][j] = alpha_j(alpha_i^vee)``.
* Weights are written in fundamental-weight coordinates, so ``mu[i] = mu(alpha_i^vee)``.
* Roots are written in simple-root coordinates, coroots in simple-coroot
  coordinates.
* The invariant inner product gives long roots squared length 2.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactalg import leading_minors, mat_inverse

SUPPORTED = {
    "A": (1, 2, 3, 4),
    "B": (2, 3),
    "C": (2, 3),
    "D": (4,),
    "G": (2,),
}


class UnsupportedType(ValueError):
    pass


def cartan_matrix(letter: str, rank: int) -> tuple[tuple[int, ...], ...]:
    letter = letter.upper()
    if letter not in SUPPORTED or rank not in SUPPORTED[letter]:
        raise UnsupportedType(
            f"type {letter}{rank} is not supported; choose from "
            + ", ".join(f"{k}{r}" for k, rs in SUPPORTED.items() for r in rs)
        )
    C = [[0] * rank for _ in range(rank)]
    for i in range(rank):
        C[i][i] = 2
    if letter == "G":
        C[0][1], C[1][0] = -1, -3
    elif letter == "D":
        for a, b in ((0, 1), (1, 2), (1, 3)):
            C[a][b] = C[b][a] = -1
    else:
        for i in range(rank - 1):
            C[i][i + 1] = C[i + 1][i] = -1
        if letter == "B":
            C[rank - 1][rank - 2] = -2
        elif letter == "C":
            C[rank - 2][rank - 1] = -2
    return tuple(tuple(r) for r in C)


def _root_lengths(C) -> list[Fraction]:
    """Squared lengths of simple roots, scaled so that long roots have length 2."""
    l = len(C)
    sq: list[Fraction | None] = [None] * l
    sq[0] = Fraction(1)
    todo = [0]
    while todo:
        i = todo.pop()
        for j in range(l):
            if j != i and C[i][j] and sq[j] is None:
                # C[i][j] |a_i|^2 = 2 <a_i, a_j> = C[j][i] |a_j|^2
                sq[j] = sq[i] * Fraction(C[i][j], C[j][i])
                todo.append(j)
    top = max(sq)
    return [2 * s / top for s in sq]


@dataclass(frozen=True)
class RootSystem:
    letter: str
    rank: int
    cartan: tuple[tuple[int, ...], ...]
    root_lengths: tuple[Fraction, ...]
    gram: tuple[tuple[Fraction, ...], ...]          # <alpha_i^vee, alpha_j^vee>
    positive_roots: tuple[tuple[int, ...], ...]     # simple-root coordinates
    positive_coroots: tuple[tuple[int, ...], ...]   # simple-coroot coordinates, same order

    @property
    def name(self) -> str:
        return f"{self.letter}{self.rank}"

    @property
    def n_positive(self) -> int:
        return len(self.positive_roots)

    def simple_root(self, i: int) -> tuple[int, ...]:
        """alpha_i in fundamental-weight coordinates."""
        return tuple(self.cartan[j][i] for j in range(self.rank))

    def simple_roots(self) -> list[tuple[int, ...]]:
        return [self.simple_root(i) for i in range(self.rank)]

    def simple_coroots(self) -> list[tuple[int, ...]]:
        return [tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)]

    def root_to_weight(self, b: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(self.cartan[r][j] * b[j] for j in range(self.rank)) for r in range(self.rank))

    def inner_roots(self, a: Sequence, b: Sequence) -> Fraction:
        """<a, b> for roots given in simple-root coordinates."""
        l = self.rank
        return sum(
            (Fraction(self.cartan[i][j]) * self.root_lengths[i] / 2 * a[i] * b[j]
             for i in range(l) for j in range(l)),
            Fraction(0),
        )

    def coroot_of(self, b: Sequence[int]) -> tuple[int, ...]:
        norm = self.inner_roots(b, b)
        c = [b[j] * self.root_lengths[j] / norm for j in range(self.rank)]
        if any(x.denominator != 1 for x in c):
            raise ArithmeticError(f"non-integral coroot for {b}")
        return tuple(int(x) for x in c)

    def coroot_norm(self, c: Sequence) -> Fraction:
        l = self.rank
        return sum((self.gram[i][j] * c[i] * c[j] for i in range(l) for j in range(l)), Fraction(0))

    def weight_gram(self):
        """Inner products of fundamental weights (inverse of the coroot Gram matrix)."""
        return mat_inverse([list(r) for r in self.gram])

    def gram_minors(self) -> list[Fraction]:
        return leading_minors(self.gram)

    def to_json(self) -> dict:
        return {
            "type": self.letter,
            "rank": self.rank,
            "cartan": [list(r) for r in self.cartan],
            "gram": [[str(x) for x in r] for r in self.gram],
            "root_lengths": [str(x) for x in self.root_lengths],
            "positive_roots": [list(r) for r in self.positive_roots],
            "positive_coroots": [list(r) for r in self.positive_coroots],
        }


def build_root_system(letter: str, rank: int) -> RootSystem:
    letter = letter.upper()
    C = cartan_matrix(letter, rank)
    lengths = _root_lengths(C)
    gram = tuple(
        tuple(2 * Fraction(C[i][j]) / lengths[j] for j in range(rank)) for i in range(rank)
    )

    # closure of the simple roots under simple reflections
    simple = [tuple(int(i == j) for j in range(rank)) for i in range(rank)]
    seen = set(simple)
    queue = deque(simple)
    while queue:
        b = queue.popleft()
        for i in range(rank):
            pair = sum(C[i][j] * b[j] for j in range(rank))
            nb = tuple(b[j] - (pair if j == i else 0) for j in range(rank))
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    positive = sorted((r for r in seen if all(x >= 0 for x in r)), key=lambda r: (sum(r), r))
    if 2 * len(positive) != len(seen):
        raise ArithmeticError("root closure is not symmetric")

    rs = RootSystem(letter, rank, C, tuple(lengths), gram, tuple(positive), ())
    coroots = tuple(rs.coroot_of(b) for b in positive)
    return RootSystem(letter, rank, C, tuple(lengths), gram, tuple(positive), coroots)


# ---------------------------------------------------------------------------
# Weyl group
# ---------------------------------------------------------------------------

Matrix = tuple[tuple[int, ...], ...]


def _matmul(A: Matrix, B: Matrix) -> Matrix:
    n = len(A)
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)) for i in range(n))


def _identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


@dataclass
class WeylGroup:
    rs: RootSystem
    elements: list[Matrix]
    lengths: list[int]
    words: list[tuple[int, ...]]
    index: dict[Matrix, int] = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def identity_index(self) -> int:
        return 0

    @property
    def longest_index(self) -> int:
        return max(range(self.order), key=lambda k: self.lengths[k])

    def simple_reflection(self, i: int) -> Matrix:
        return reflection_matrix(self.rs, tuple(int(j == i) for j in range(self.rs.rank)))

    def mul(self, a: int, b: int) -> int:
        return self.index[_matmul(self.elements[a], self.elements[b])]

    def inverse(self, a: int) -> int:
        return self.index[self.word_matrix(tuple(reversed(self.words[a])))]

    def word_matrix(self, word: Sequence[int]) -> Matrix:
        M = _identity(self.rs.rank)
        for i in word:
            M = _matmul(M, self.simple_reflection(i))
        return M

    def inversion_count(self, k: int) -> int:
        """Number of positive roots sent to negative roots by element k."""
        M = self.elements[k]
        Cinv = mat_inverse([list(r) for r in self.rs.cartan])
        count = 0
        for b in self.rs.positive_roots:
            v = act(M, self.rs.root_to_weight(b))
            coords = [sum(Cinv[r][c] * v[c] for c in range(len(v))) for r in range(len(v))]
            if all(x <= 0 for x in coords):
                count += 1
        return count

    def coroot_matrix(self, k: int) -> list[list[int]]:
        """Action of element k on t in simple-coroot coordinates."""
        l = self.rs.rank
        M = [list(r) for r in _identity(l)]
        for i in self.words[k]:
            # s_i(x) = x - alpha_i(x) alpha_i^vee, alpha_i(alpha_j^vee) = cartan[j][i]
            T = [[int(r == c) - (self.rs.cartan[c][i] if r == i else 0) for c in range(l)] for r in range(l)]
            M = [[sum(M[r][m] * T[m][c] for m in range(l)) for c in range(l)] for r in range(l)]
        return M


def reflection_matrix(rs: RootSystem, root: Sequence[int]) -> Matrix:
    """s_beta on fundamental-weight coordinates: mu -> mu - mu(beta^vee) beta."""
    beta_w = rs.root_to_weight(root)
    cor = rs.coroot_of(root)
    l = rs.rank
    return tuple(tuple(int(r == c) - beta_w[r] * cor[c] for c in range(l)) for r in range(l))


def weyl_generate(rs: RootSystem) -> WeylGroup:
    """Breadth-first closure over simple reflections.

    Words grow on the right, so BFS depth is the length of each element.
    """
    l = rs.rank
    gens = [reflection_matrix(rs, tuple(int(j == i) for j in range(l))) for i in range(l)]
    e = _identity(l)
    elements, lengths, words = [e], [0], [()]
    index = {e: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for k in frontier:
            for i, g in enumerate(gens):
                m = _matmul(elements[k], g)
                if m not in index:
                    index[m] = len(elements)
                    elements.append(m)
                    lengths.append(lengths[k] + 1)
                    words.append(words[k] + (i,))
                    nxt.append(index[m])
        frontier = nxt
        if len(elements) > 384:
            raise UnsupportedType("Weyl group exceeds the supported size")
    W = WeylGroup(rs, elements, lengths, words, index)
    return W


def act(w: Matrix, v: Sequence) -> tuple:
    return tuple(sum(w[r][c] * v[c] for c in range(len(v))) for r in range(len(v)))


def pairing(mu: Sequence, coroot: Sequence) -> Fraction:
    """mu(beta^vee) for a weight in fundamental-weight coordinates and a coroot
    in simple-coroot coordinates."""
    return sum((Fraction(m) * c for m, c in zip(mu, coroot)), Fraction(0))
