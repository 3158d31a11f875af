"""Finitely presented groups and their Fox calculus.

Words are tuples of ``(generator_index, +1 | -1)`` letters kept freely
reduced.  Group ring elements are integer combinations of words in the free
group; they are evaluated through a representation tensored with the free
abelianization, producing matrices of Laurent polynomials.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core_arith import ONE, ZERO, GaussianRational, LaurentPoly, gaussian


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------


class Word:
    """A freely reduced word in the free group on numbered generators."""

    __slots__ = ("letters", "_hash")

    def __init__(self, letters: Iterable[tuple] = ()):
        out: list = []
        for g, e in letters:
            g, e = int(g), int(e)
            if e not in (1, -1):
                raise ValueError("letters carry exponent +1 or -1; expand powers first")
            if out and out[-1][0] == g and out[-1][1] == -e:
                out.pop()
            else:
                out.append((g, e))
        self.letters = tuple(out)
        self._hash = None

    @classmethod
    def generator(cls, g: int, power: int = 1) -> "Word":
        e = 1 if power > 0 else -1
        return cls([(g, e)] * abs(power))

    @classmethod
    def identity(cls) -> "Word":
        return cls()

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word((g, -e) for g, e in reversed(self.letters))

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.letters)
        return self._hash

    def __lt__(self, other: "Word"):
        return (len(self.letters), self.letters) < (len(other.letters), other.letters)

    def exponent_sums(self, ngens: int) -> list:
        out = [0] * ngens
        for g, e in self.letters:
            out[g] += e
        return out

    def substitute(self, images: Sequence["Word"]) -> "Word":
        letters: list = []
        for g, e in self.letters:
            img = images[g] if e == 1 else images[g].inverse()
            letters.extend(img.letters)
        return Word(letters)

    def to_str(self, names: Sequence[str]) -> str:
        if not self.letters:
            return "1"
        return " ".join(names[g] if e == 1 else f"{names[g]}^-1" for g, e in self.letters)

    def __repr__(self):
        return f"Word({self.letters})"


# ---------------------------------------------------------------------------
# Presentations
# ---------------------------------------------------------------------------


class PresentationSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class Presentation:
    names: tuple
    relators: tuple

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate generator names")

    @property
    def ngens(self) -> int:
        return len(self.names)

    @property
    def deficiency(self) -> int:
        return len(self.names) - len(self.relators)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown generator {name!r}") from None

    def __str__(self):
        rels = ", ".join(r.to_str(self.names) for r in self.relators)
        return f"<{','.join(self.names)} | {rels}>"


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_POWER = re.compile(r"\^\s*(-?\d+)")


def parse_presentation(text: str) -> Presentation:
    """Parse ``'<a,b | a b a b^-1 a^-1 b^-1>'`` (``name^k`` powers allowed)."""
    pos = 0
    n = len(text)

    def skip():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def expect(ch: str):
        nonlocal pos
        skip()
        if pos >= n or text[pos] != ch:
            found = text[pos] if pos < n else "end of input"
            raise PresentationSyntaxError(f"expected {ch!r}, found {found!r}", pos)
        pos += 1

    expect("<")
    names: list = []
    skip()
    if pos < n and text[pos] != "|":
        while True:
            skip()
            m = _NAME.match(text, pos)
            if not m:
                raise PresentationSyntaxError("expected a generator name", pos)
            if m.group() in names:
                raise PresentationSyntaxError(f"duplicate generator {m.group()!r}", pos)
            names.append(m.group())
            pos = m.end()
            skip()
            if pos < n and text[pos] == ",":
                pos += 1
                continue
            break
    expect("|")
    relators: list = []
    skip()
    if pos < n and text[pos] == ">":
        pos += 1
    else:
        while True:
            letters: list = []
            skip()
            while pos < n and text[pos] not in ",>":
                m = _NAME.match(text, pos)
                if not m:
                    if text[pos] == "1":
                        pos += 1
                        skip()
                        continue
                    raise PresentationSyntaxError(f"unexpected character {text[pos]!r}", pos)
                name = m.group()
                if name not in names:
                    raise PresentationSyntaxError(f"unknown generator {name!r}", pos)
                pos = m.end()
                power = 1
                pm = _POWER.match(text, pos)
                if pm:
                    power = int(pm.group(1))
                    pos = pm.end()
                g = names.index(name)
                letters.extend([(g, 1 if power > 0 else -1)] * abs(power))
                skip()
            relators.append(Word(letters))
            if pos >= n:
                raise PresentationSyntaxError("unterminated presentation, expected '>'", pos)
            if text[pos] == ",":
                pos += 1
                continue
            pos += 1  # '>'
            break
    skip()
    if pos != n:
        raise PresentationSyntaxError("trailing characters", pos)
    return Presentation(tuple(names), tuple(relators))


def parse_word(text: str, names: Sequence[str]) -> Word:
    p = parse_presentation(f"<{','.join(names)} | {text}>")
    return p.relators[0]


# ---------------------------------------------------------------------------
# Integer normal forms
# ---------------------------------------------------------------------------


def smith_normal_form(A: Sequence[Sequence[int]]):
    """Return ``(D, U, V)`` with ``U A V = D`` diagonal and U, V unimodular."""
    m = len(A)
    n = len(A[0]) if m else 0
    D = [list(map(int, r)) for r in A]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in D:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, k):  # row dst += k * row src
        D[dst] = [a + k * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + k * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, k):
        for r in D:
            r[dst] += k * r[src]
        for r in V:
            r[dst] += k * r[src]

    t = 0
    while t < min(m, n):
        nz = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            changed = False
            for i in range(t + 1, m):
                if D[i][t]:
                    q = D[i][t] // D[t][t]
                    add_row(i, t, -q)
                    if D[i][t]:
                        swap_rows(t, i)
                        changed = True
            for j in range(t + 1, n):
                if D[t][j]:
                    q = D[t][j] // D[t][t]
                    add_col(j, t, -q)
                    if D[t][j]:
                        swap_cols(t, j)
                        changed = True
            if changed:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % D[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return D, U, V


def _row_hermite(Q: list) -> list:
    """Row-style Hermite normal form of an integer matrix of full row rank."""
    Q = [list(r) for r in Q]
    k = len(Q)
    g = len(Q[0]) if k else 0
    row = 0
    for col in range(g):
        if row >= k:
            break
        while True:
            nz = [(abs(Q[i][col]), i) for i in range(row, k) if Q[i][col]]
            if not nz:
                break
            _, piv = min(nz)
            Q[row], Q[piv] = Q[piv], Q[row]
            done = True
            for i in range(row + 1, k):
                if Q[i][col]:
                    q = Q[i][col] // Q[row][col]
                    Q[i] = [a - q * b for a, b in zip(Q[i], Q[row])]
                    if Q[i][col]:
                        done = False
            if done:
                break
        if not any(Q[i][col] for i in range(row, k)):
            continue
        if Q[row][col] < 0:
            Q[row] = [-x for x in Q[row]]
        for i in range(row):
            q = Q[i][col] // Q[row][col]
            if q:
                Q[i] = [a - q * b for a, b in zip(Q[i], Q[row])]
        row += 1
    return Q


# ---------------------------------------------------------------------------
# Abelianization and characters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AbelianizationMap:
    """The quotient onto the free abelianization ``Z^rank``."""

    rank: int
    images: tuple  # per generator, a tuple of length rank
    torsion: tuple = ()

    def of_word(self, w: Word) -> tuple:
        out = [0] * self.rank
        for g, e in w.letters:
            img = self.images[g]
            for j in range(self.rank):
                out[j] += e * img[j]
        return tuple(out)

    def matrix(self) -> list:
        """Columns are generator images."""
        return [[img[j] for img in self.images] for j in range(self.rank)]


def exponent_matrix(p: Presentation) -> list:
    return [r.exponent_sums(p.ngens) for r in p.relators]


def abelianize(p: Presentation) -> AbelianizationMap:
    """Free abelianization via the Smith normal form of the exponent-sum matrix."""
    g = p.ngens
    E = exponent_matrix(p)
    if not E:
        images = [tuple(int(i == j) for j in range(g)) for i in range(g)]
        return AbelianizationMap(g, tuple(images), ())
    D, U, V = smith_normal_form(E)
    r = sum(1 for i in range(min(len(D), g)) if D[i][i])
    torsion = tuple(D[i][i] for i in range(r) if D[i][i] > 1)
    k = g - r
    Q = [[V[j][r + c] for j in range(g)] for c in range(k)]  # k x g, columns = images
    Q = _row_hermite(Q)
    images = tuple(tuple(Q[c][j] for c in range(k)) for j in range(g))
    ab = AbelianizationMap(k, images, torsion)
    for rel in p.relators:
        if any(ab.of_word(rel)):
            raise ArithmeticError("abelianization does not kill a relator")
    return ab


@dataclass(frozen=True)
class Character:
    """An integral class ``phi`` given by its value on each generator."""

    values: tuple

    @property
    def primitive(self) -> bool:
        g = 0
        for v in self.values:
            g = math.gcd(g, v)
        return g == 1

    @property
    def divisibility(self) -> int:
        g = 0
        for v in self.values:
            g = math.gcd(g, v)
        return g

    def of_word(self, w: Word) -> int:
        return sum(e * self.values[g] for g, e in w.letters)

    def scaled(self, k: int) -> "Character":
        return Character(tuple(k * v for v in self.values))

    def __add__(self, other: "Character") -> "Character":
        return Character(tuple(a + b for a, b in zip(self.values, other.values)))


def make_character(p: Presentation, values: Sequence[int]) -> Character:
    if len(values) != p.ngens:
        raise ValueError(f"character needs {p.ngens} values, got {len(values)}")
    phi = Character(tuple(int(v) for v in values))
    for rel in p.relators:
        if phi.of_word(rel):
            raise ValueError(f"character does not vanish on relator {rel.to_str(p.names)}")
    return phi


def character_covector(phi: Character, q: AbelianizationMap) -> tuple:
    """The integer covector ``psi`` on ``Z^rank`` with ``phi = psi o q``."""
    k = q.rank
    if k == 0:
        if any(phi.values):
            raise ValueError("nonzero character on a group with finite abelianization")
        return ()
    Q = q.matrix()
    # normal equations (Q Q^T) psi^T = Q phi^T, exactly
    G = [[Fraction(sum(Q[a][j] * Q[b][j] for j in range(len(phi.values)))) for b in range(k)] for a in range(k)]
    rhs = [Fraction(sum(Q[a][j] * phi.values[j] for j in range(len(phi.values)))) for a in range(k)]
    psi = _solve_fraction(G, rhs)
    if any(x.denominator != 1 for x in psi):
        raise ValueError("character does not factor integrally through the abelianization")
    psi = tuple(int(x) for x in psi)
    if any(sum(psi[a] * Q[a][j] for a in range(k)) != phi.values[j] for j in range(len(phi.values))):
        raise ValueError("character does not factor through the free abelianization")
    return psi


def _solve_fraction(A: list, b: list) -> list:
    n = len(A)
    M = [list(A[i]) + [b[i]] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if M[i][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        for i in range(n):
            if i != c and M[i][c] != 0:
                f = M[i][c] / M[c][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------


def _mat_mul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    return [[sum((A[i][k] * B[k][j] for k in range(m) if A[i][k] and B[k][j]), ZERO) for j in range(p)] for i in range(n)]


def _identity(n: int):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def _mat_inverse(A):
    n = len(A)
    M = [list(A[i]) + _identity(n)[i] for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            raise ValueError("matrix is singular")
        M[c], M[piv] = M[piv], M[c]
        inv = M[c][c].inverse()
        M[c] = [x * inv for x in M[c]]
        for i in range(n):
            if i != c and M[i][c]:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return [r[n:] for r in M]


class Representation:
    """Generator matrices over Q(i) satisfying every relator exactly."""

    def __init__(self, p: Presentation, matrices: Sequence, *, check: bool = True):
        if len(matrices) != p.ngens:
            raise ValueError(f"need {p.ngens} matrices, got {len(matrices)}")
        mats = [[[gaussian(x) for x in row] for row in M] for M in matrices]
        n = len(mats[0]) if mats else 1
        for M in mats:
            if len(M) != n or any(len(r) != n for r in M):
                raise ValueError("representation matrices must all be n x n")
        self.presentation = p
        self.dim = n
        self.matrices = tuple(tuple(tuple(r) for r in M) for M in mats)
        inverses = []
        for M in mats:
            inv = _mat_inverse(M)
            if _mat_mul(M, inv) != _identity(n):
                raise ValueError("inverse verification failed")
            inverses.append(inv)
        self.inverses = tuple(tuple(tuple(r) for r in M) for M in inverses)
        self._cache: dict = {}
        if check:
            for rel in p.relators:
                if self.of_word(rel) != _identity(n):
                    raise ValueError(f"representation does not kill relator {rel.to_str(p.names)}")

    @classmethod
    def trivial(cls, p: Presentation, n: int = 1) -> "Representation":
        return cls(p, [_identity(n) for _ in range(p.ngens)])

    def of_word(self, w: Word) -> list:
        hit = self._cache.get(w)
        if hit is not None:
            return hit
        n = self.dim
        result = _identity(n)
        for g, e in w.letters:
            M = self.matrices[g] if e == 1 else self.inverses[g]
            result = _mat_mul(result, M)
        self._cache[w] = result
        return result


# ---------------------------------------------------------------------------
# Group ring and Fox calculus
# ---------------------------------------------------------------------------


class GroupRingElement:
    """Finite integer combination of reduced words."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        clean: dict = {}
        for w, c in (terms or {}).items():
            if c:
                clean[w] = clean.get(w, 0) + int(c)
                if not clean[w]:
                    del clean[w]
        self.terms = clean

    @classmethod
    def of_word(cls, w: Word, c: int = 1) -> "GroupRingElement":
        return cls({w: c})

    @classmethod
    def one(cls) -> "GroupRingElement":
        return cls({Word(): 1})

    @classmethod
    def zero(cls) -> "GroupRingElement":
        return cls({})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        if isinstance(other, int):
            other = GroupRingElement({Word(): other})
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return GroupRingElement(out)

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElement({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = GroupRingElement({Word(): other})
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return GroupRingElement({w: c * other for w, c in self.terms.items()})
        out: dict = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 * w2
                out[w] = out.get(w, 0) + c1 * c2
        return GroupRingElement(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            other = GroupRingElement({Word(): other})
        return isinstance(other, GroupRingElement) and self.terms == other.terms

    __hash__ = None

    def substitute(self, images: Sequence[Word]) -> "GroupRingElement":
        out: dict = {}
        for w, c in self.terms.items():
            nw = w.substitute(images)
            out[nw] = out.get(nw, 0) + c
        return GroupRingElement(out)

    def max_word_length(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def to_str(self, names: Sequence[str]) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms):
            c = self.terms[w]
            body = w.to_str(names)
            if body == "1":
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"GroupRingElement({self.terms})"


def fox_derivative(w: Word, gen: int, side: str = "left", ngens: int | None = None) -> GroupRingElement:
    """Free derivative of ``w`` with respect to generator ``gen``.

    ``side="left"`` is the classical derivative, ``d(uv) = du + u dv``, with
    ``sum_i d_i(w) (x_i - 1) = w - 1``.  ``side="right"`` is its mirror,
    ``D(uv) = D(u) v + D(v)``, with ``sum_i (x_i - 1) D_i(w) = w - 1``.
    """
    if ngens is not None and not 0 <= gen < ngens:
        raise KeyError(f"unknown generator index {gen}")
    letters = w.letters
    out: dict = {}
    if side == "left":
        for k, (g, e) in enumerate(letters):
            if g != gen:
                continue
            prefix = Word(letters[:k])
            if e == 1:
                key, c = prefix, 1
            else:
                key, c = prefix * Word([(g, -1)]), -1
            out[key] = out.get(key, 0) + c
    elif side == "right":
        for k, (g, e) in enumerate(letters):
            if g != gen:
                continue
            suffix = Word(letters[k + 1 :])
            if e == 1:
                key, c = suffix, 1
            else:
                key, c = Word([(g, -1)]) * suffix, -1
            out[key] = out.get(key, 0) + c
    else:
        raise ValueError("side must be 'left' or 'right'")
    return GroupRingElement(out)


# ---------------------------------------------------------------------------
# Evaluation through sigma (x) q
# ---------------------------------------------------------------------------


class SigmaQ:
    """Evaluates group ring elements as ``n x n`` matrices over ``Q(i)[Z^k]``."""

    def __init__(self, sigma: Representation, q: AbelianizationMap):
        if len(q.images) != sigma.presentation.ngens:
            raise ValueError("abelianization and representation disagree on generators")
        self.sigma = sigma
        self.q = q
        self.n = sigma.dim
        self.rank = q.rank

    def word(self, w: Word) -> list:
        mono = self.q.of_word(w)
        M = self.sigma.of_word(w)
        return [[LaurentPoly._from_clean({mono: x}, self.rank) if x else LaurentPoly.zero(self.rank) for x in row] for row in M]

    def element(self, e: GroupRingElement) -> list:
        n, k = self.n, self.rank
        acc = [[dict() for _ in range(n)] for _ in range(n)]
        for w, c in e.terms.items():
            mono = self.q.of_word(w)
            M = self.sigma.of_word(w)
            for i in range(n):
                for j in range(n):
                    x = M[i][j]
                    if x:
                        d = acc[i][j]
                        d[mono] = d.get(mono, ZERO) + x * c
        return [[LaurentPoly._from_clean({m: v for m, v in acc[i][j].items() if v}, k) for j in range(n)] for i in range(n)]

    def matrix(self, rows: Sequence[Sequence[GroupRingElement]]) -> list:
        """Block matrix of the evaluated entries."""
        n = self.n
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        out = [[None] * (nc * n) for _ in range(nr * n)]
        for i in range(nr):
            for j in range(nc):
                blk = self.element(rows[i][j])
                for a in range(n):
                    for b in range(n):
                        out[i * n + a][j * n + b] = blk[a][b]
        return out


def evaluate_sigma_q(e: GroupRingElement, sigma: Representation, q: AbelianizationMap) -> list:
    return SigmaQ(sigma, q).element(e)


# ---------------------------------------------------------------------------
# Nielsen moves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NielsenMove:
    """``kind='mul'``: x_i <- x_i x_j^e.  ``kind='inv'``: x_i <- x_i^-1."""

    kind: str
    i: int
    j: int = -1
    e: int = 1

    def describe(self, names: Sequence[str]) -> str:
        if self.kind == "inv":
            return f"{names[self.i]} <- {names[self.i]}^-1"
        suffix = "" if self.e == 1 else "^-1"
        return f"{names[self.i]} <- {names[self.i]} {names[self.j]}{suffix}"


def _move_images(move: NielsenMove, ngens: int, inverse: bool) -> list:
    """Words for the old generators in terms of the new ones (inverse=True) or vice versa."""
    images = [Word.generator(g) for g in range(ngens)]
    if move.kind == "inv":
        images[move.i] = Word.generator(move.i, -1)
    else:
        e = -move.e if inverse else move.e
        images[move.i] = Word([(move.i, 1), (move.j, e)])
    return images


def apply_nielsen_move(p: Presentation, move: NielsenMove) -> Presentation:
    """Rewrite relators for the new generating set (names are kept)."""
    if move.kind == "mul" and move.i == move.j:
        raise ValueError("a Nielsen move needs two distinct generators")
    old_in_new = _move_images(move, p.ngens, inverse=True)
    return Presentation(p.names, tuple(r.substitute(old_in_new) for r in p.relators))


def transport_representation(sigma: Representation, moves: Sequence[NielsenMove], target: Presentation) -> Representation:
    mats = [list(map(list, M)) for M in sigma.matrices]
    invs = [list(map(list, M)) for M in sigma.inverses]
    for mv in moves:
        if mv.kind == "inv":
            mats[mv.i], invs[mv.i] = invs[mv.i], mats[mv.i]
        else:
            other = mats[mv.j] if mv.e == 1 else invs[mv.j]
            mats[mv.i] = _mat_mul(mats[mv.i], other)
            invs[mv.i] = _mat_inverse(mats[mv.i])
    return Representation(target, mats)


def transport_character(phi: Character, moves: Sequence[NielsenMove]) -> Character:
    vals = list(phi.values)
    for mv in moves:
        if mv.kind == "inv":
            vals[mv.i] = -vals[mv.i]
        else:
            vals[mv.i] += mv.e * vals[mv.j]
    return Character(tuple(vals))


def transport_abelianization(q: AbelianizationMap, moves: Sequence[NielsenMove]) -> AbelianizationMap:
    imgs = [list(v) for v in q.images]
    for mv in moves:
        if mv.kind == "inv":
            imgs[mv.i] = [-x for x in imgs[mv.i]]
        else:
            imgs[mv.i] = [a + mv.e * b for a, b in zip(imgs[mv.i], imgs[mv.j])]
    return AbelianizationMap(q.rank, tuple(tuple(v) for v in imgs), q.torsion)


@dataclass
class AdaptedPresentation:
    presentation: Presentation
    moves: list
    abelianization: AbelianizationMap
    character: Character
    phi_generator: int  # index of the generator y with phi(y) = 1
    basis_generators: list  # generators whose images form a basis of G_fab (phi_generator first)


def _unimodular_with_first_row(psi: Sequence[int]) -> list:
    """An integer matrix with determinant +-1 whose first row is ``psi`` (primitive)."""
    k = len(psi)
    # column operations W with psi W = e_1; track W^{-1} by the inverse row operations
    row = list(psi)
    Winv = [[int(i == j) for j in range(k)] for i in range(k)]
    while sum(1 for x in row if x) > 1 or row[0] == 0:
        nz = [(abs(x), j) for j, x in enumerate(row) if x]
        _, p = min(nz)
        if sum(1 for x in row if x) == 1:
            # move the single entry to slot 0
            row[0], row[p] = row[p], row[0]
            Winv[0], Winv[p] = Winv[p], Winv[0]
            break
        for j in range(k):
            if j != p and row[j]:
                qt = row[j] // row[p]
                row[j] -= qt * row[p]
                # column op c_j -= qt c_p on W is row op r_p += qt r_j on W^{-1}
                Winv[p] = [a + qt * b for a, b in zip(Winv[p], Winv[j])]
    if row[0] == -1:
        row[0] = 1
        Winv[0] = [-x for x in Winv[0]]
    if row[0] != 1:
        raise ValueError("character is not primitive")
    return Winv


def is_adapted(q: AbelianizationMap, phi: Character) -> tuple:
    """Return (True, phi_generator, basis) if the presentation already satisfies the adaptation."""
    nonzero = [j for j, img in enumerate(q.images) if any(img)]
    if len(nonzero) != q.rank:
        return False, -1, []
    M = [[q.images[j][r] for j in nonzero] for r in range(q.rank)]
    if q.rank and abs(_int_det(M)) != 1:
        return False, -1, []
    ones = [j for j in nonzero if phi.values[j] == 1]
    zeros = [j for j in nonzero if phi.values[j] == 0]
    if len(ones) == 1 and len(zeros) == len(nonzero) - 1:
        return True, ones[0], [ones[0]] + zeros
    return False, -1, []


def _int_det(M) -> int:
    n = len(M)
    A = [[Fraction(x) for x in r] for r in M]
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for i in range(c + 1, n):
            f = A[i][c] / A[c][c]
            A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return int(det)


def nielsen_adapt(p: Presentation, phi: Character, q: AbelianizationMap | None = None) -> AdaptedPresentation:
    """Nielsen-transform so that one generator has ``phi = 1``, a basis of ``G_fab``
    is formed by generator images (the rest of that basis in ``ker phi``) and all
    other generators die in ``G_fab``."""
    q = abelianize(p) if q is None else q
    for rel in p.relators:
        if phi.of_word(rel):
            raise ValueError("not a character: nonzero on a relator")
    if not phi.primitive:
        raise ValueError("character is not primitive")
    psi = character_covector(phi, q)
    ok, gen, basis = is_adapted(q, phi)
    if ok:
        return AdaptedPresentation(p, [], q, phi, gen, basis)
    k, g = q.rank, p.ngens
    T = _unimodular_with_first_row(psi)
    Q = [[sum(T[r][c] * q.images[j][c] for c in range(k)) for j in range(g)] for r in range(k)]
    moves: list = []

    def col_op(dst: int, src: int, times: int):
        # x_dst <- x_dst x_src^times, recorded as |times| unit moves
        e = 1 if times > 0 else -1
        for _ in range(abs(times)):
            moves.append(NielsenMove("mul", dst, src, e))
            for r in range(k):
                Q[r][dst] += e * Q[r][src]

    def invert(c: int):
        moves.append(NielsenMove("inv", c))
        for r in range(k):
            Q[r][c] = -Q[r][c]

    active = list(range(g))
    pivots: list = []
    for r in range(k):
        while True:
            nz = [(abs(Q[r][c]), c) for c in active if Q[r][c]]
            if not nz:
                raise ArithmeticError("generator images do not span the abelianization")
            _, pc = min(nz)
            if len(nz) == 1:
                break
            for _, c in nz:
                if c != pc:
                    col_op(c, pc, -(Q[r][c] // Q[r][pc]))
        if abs(Q[r][pc]) != 1:
            raise ArithmeticError("generator images do not generate the abelianization")
        if Q[r][pc] == -1:
            invert(pc)
        pivots.append(pc)
        active.remove(pc)
    for idx, pc in enumerate(pivots):
        for r2 in range(idx + 1, k):
            if Q[r2][pc]:
                col_op(pc, pivots[r2], -Q[r2][pc])
    new_p = p
    for mv in moves:
        new_p = apply_nielsen_move(new_p, mv)
    new_q = transport_abelianization(q, moves)
    new_phi = transport_character(phi, moves)
    ok, gen, basis = is_adapted(new_q, new_phi)
    if not ok:
        raise ArithmeticError("Nielsen adaptation failed its own postcondition")
    return AdaptedPresentation(new_p, moves, new_q, new_phi, gen, basis)


# ---------------------------------------------------------------------------
# Presentation chain complex
# ---------------------------------------------------------------------------


def relator_jacobian(p: Presentation) -> list:
    """Rows = generators, columns = relators, entries the right-handed Fox derivatives."""
    return [[fox_derivative(r, i, side="right") for r in p.relators] for i in range(p.ngens)]


def generator_row(p: Presentation) -> list:
    """The row ``(1 - x_1, ..., 1 - x_g)``."""
    return [[GroupRingElement.one() - GroupRingElement.of_word(Word.generator(i)) for i in range(p.ngens)]]


def chain_complex(p: Presentation, *, require_deficiency_one: bool = False):
    """Cellular chain complex of the presentation 2-complex's universal cover.

    With right module conventions and matrices acting on the left,
    ``d1 = (1 - x_i)`` and the column of relator ``r`` in ``d2`` holds the
    right-handed Fox derivatives, so ``d1 d2 = 1 - r`` vanishes in ZG.
    """
    from .agrarian import BasedChainComplex

    shaped = p.deficiency == 1
    if require_deficiency_one and not shaped:
        raise ValueError(f"presentation has deficiency {p.deficiency}, expected 1")
    boundaries = {1: generator_row(p)}
    if p.relators:
        boundaries[2] = relator_jacobian(p)
    ranks = [1, p.ngens, len(p.relators)]
    labels = {0: ["p"], 1: list(p.names), 2: [f"r{j + 1}" for j in range(len(p.relators))]}
    return BasedChainComplex(ranks, boundaries, labels, presentation=p, deficiency_one=shaped)
