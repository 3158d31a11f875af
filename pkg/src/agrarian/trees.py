"""The semiring of finite rooted trees with its well-order.

A tree is stored as the tuple of its children, each child again such a tuple,
sorted in decreasing order.  With that encoding Python's tuple comparison is
exactly the recursive order: compare the largest children first, then the
remaining ones, and a tree whose children form a proper prefix is smaller.
"""

from __future__ import annotations

import random
from functools import total_ordering
from typing import Iterable


def _canon(children: Iterable[tuple]) -> tuple:
    return tuple(sorted(children, reverse=True))


@total_ordering
class RootedTree:
    __slots__ = ("key",)

    def __init__(self, children: Iterable["RootedTree"] = ()):
        self.key = _canon(c.key for c in children)

    @classmethod
    def _from_key(cls, key: tuple) -> "RootedTree":
        obj = object.__new__(cls)
        obj.key = key
        return obj

    @classmethod
    def zero(cls) -> "RootedTree":
        return cls._from_key(())

    @classmethod
    def one(cls) -> "RootedTree":
        return cls._from_key(((),))

    @property
    def children(self) -> tuple:
        return tuple(RootedTree._from_key(k) for k in self.key)

    def is_zero(self) -> bool:
        return not self.key

    def edges(self) -> int:
        return sum(1 + RootedTree._from_key(k).edges() for k in self.key)

    def depth(self) -> int:
        return 1 + max((RootedTree._from_key(k).depth() for k in self.key), default=-1)

    def exp(self) -> "RootedTree":
        return RootedTree._from_key((self.key,))

    def log(self) -> "RootedTree":
        if not self.key:
            raise ValueError("the zero tree has no log")
        return RootedTree._from_key(self.key[0])

    def __add__(self, other: "RootedTree") -> "RootedTree":
        return tree_add(self, other)

    def __mul__(self, other: "RootedTree") -> "RootedTree":
        return tree_mul(self, other)

    def __eq__(self, other):
        return isinstance(other, RootedTree) and self.key == other.key

    def __lt__(self, other: "RootedTree"):
        return self.key < other.key

    def __hash__(self):
        return hash(self.key)

    def __str__(self):
        return serialize(self)

    def __repr__(self):
        return f"RootedTree({serialize(self)!r})"


def tree_add(x: RootedTree, y: RootedTree) -> RootedTree:
    """Identify the roots: the children multisets are united."""
    return RootedTree._from_key(_canon(x.key + y.key))


def tree_mul(x: RootedTree, y: RootedTree) -> RootedTree:
    """``sum exp(X' + Y')`` over pairs of children; zero if either factor is zero."""
    if not x.key or not y.key:
        return RootedTree.zero()
    kids = [_canon(a + b) for a in x.key for b in y.key]
    return RootedTree._from_key(_canon(kids))


def tree_diamond(x: RootedTree) -> RootedTree:
    return x.exp().exp()


def tree_compare(x: RootedTree, y: RootedTree) -> int:
    """-1, 0 or 1 by the recursive order (zero tree least)."""
    return (x.key > y.key) - (x.key < y.key)


def tree_compare_recursive(x: RootedTree, y: RootedTree) -> int:
    """The order written out as the log/remainder recursion, without tuple comparison."""
    if not x.key or not y.key:
        return (len(x.key) > 0) - (len(y.key) > 0)
    c = tree_compare_recursive(x.log(), y.log())
    if c:
        return c
    return tree_compare_recursive(RootedTree._from_key(x.key[1:]), RootedTree._from_key(y.key[1:]))


def serialize(x: RootedTree) -> str:
    return "(" + "".join(serialize(RootedTree._from_key(k)) for k in x.key) + ")"


def parse_tree(text: str) -> RootedTree:
    pos = 0

    def node() -> tuple:
        nonlocal pos
        if pos >= len(text) or text[pos] != "(":
            raise ValueError(f"expected '(' at position {pos}")
        pos += 1
        kids = []
        while pos < len(text) and text[pos] == "(":
            kids.append(node())
        if pos >= len(text) or text[pos] != ")":
            raise ValueError(f"expected ')' at position {pos}")
        pos += 1
        return _canon(kids)

    text = "".join(text.split())
    key = node()
    if pos != len(text):
        raise ValueError(f"trailing characters at position {pos}")
    return RootedTree._from_key(key)


def random_tree(rng: random.Random, max_edges: int = 12) -> RootedTree:
    """Uniform random attachment of up to ``max_edges`` new vertices."""
    m = rng.randint(0, max_edges)
    parent = [None]
    for v in range(1, m + 1):
        parent.append(rng.randrange(v))
    kids = [[] for _ in range(m + 1)]
    for v in range(m, 0, -1):
        kids[parent[v]].append(v)

    def build(v: int) -> tuple:
        return _canon(build(c) for c in kids[v])

    return RootedTree._from_key(build(0))
