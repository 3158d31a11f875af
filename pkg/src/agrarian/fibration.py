"""L2-Betti numbers of total spaces of fibrations from fiber and base data.

Topological hypotheses (simple connectivity, the Singer property, negative
curvature, ...) are flags supplied by the caller.  Only their internal
consistency is checked; the module computes the arithmetic consequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence


class FibrationHypothesisError(ValueError):
    pass


@dataclass
class FibrationInput:
    fiber_betti: list
    base_l2: list
    base_dim: int
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        self.fiber_betti = [int(b) for b in self.fiber_betti]
        self.base_l2 = [Fraction(b) for b in self.base_l2]
        self.base_dim = int(self.base_dim)
        if any(b < 0 for b in self.fiber_betti) or any(b < 0 for b in self.base_l2):
            raise FibrationHypothesisError("Betti numbers must be nonnegative")
        if not self.fiber_betti:
            raise FibrationHypothesisError("fiber Betti list is empty")
        if self.base_dim < 0:
            raise FibrationHypothesisError("negative base dimension")
        if len(self.base_l2) > self.base_dim + 1 and any(self.base_l2[self.base_dim + 1:]):
            raise FibrationHypothesisError("base L2-Betti numbers above the base dimension")

    @classmethod
    def from_json(cls, data: dict) -> "FibrationInput":
        unknown = set(data) - {"fiber_betti", "base_l2", "base_dim", "flags"}
        if unknown:
            raise FibrationHypothesisError(f"unknown fibration fields {sorted(unknown)}")
        return cls(data.get("fiber_betti", [1]), data.get("base_l2", []), data.get("base_dim", 0),
                   dict(data.get("flags", {})))

    def flag(self, name: str):
        return self.flags.get(name)

    def base(self, i: int) -> Fraction:
        return self.base_l2[i] if 0 <= i < len(self.base_l2) else Fraction(0)

    def fiber(self, j: int) -> int:
        return self.fiber_betti[j] if 0 <= j < len(self.fiber_betti) else 0


@dataclass
class FibrationReport:
    values: list
    kind: str  # "exact" or "bound"
    clause: str
    positive_degrees: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"b2": [_num(v) for v in self.values], "kind": self.kind, "clause": self.clause}
        if self.positive_degrees:
            out["positive_degrees"] = list(self.positive_degrees)
        return out


def _num(v: Fraction):
    return int(v) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _require_pi1(inp: FibrationInput):
    if not (inp.flag("fiber_simply_connected") or inp.flag("pi1_iso")):
        raise FibrationHypothesisError("needs fiber_simply_connected or pi1_iso")


def _require_simply_connected(inp: FibrationInput):
    if not inp.flag("fiber_simply_connected"):
        raise FibrationHypothesisError("needs fiber_simply_connected")


def betti_bound(inp: FibrationInput) -> FibrationReport:
    """``b2_i(E) <= sum_j b_j(F) b2_{i-j}(B)``."""
    _require_pi1(inp)
    top = len(inp.fiber_betti) + max(len(inp.base_l2), inp.base_dim + 1) - 1
    vals = [sum((inp.fiber(j) * inp.base(i - j) for j in range(i + 1)), Fraction(0)) for i in range(top)]
    return FibrationReport(vals, "bound", "convolution bound")


def _two_degree(inp: FibrationInput) -> int:
    n = inp.flag("fiber_two_degree_support")
    if n is None:
        raise FibrationHypothesisError("needs fiber_two_degree_support = n")
    n = int(n)
    if n < max(2, inp.base_dim):
        raise FibrationHypothesisError(f"two-degree support n={n} must be >= max(2, dim B)={max(2, inp.base_dim)}")
    if inp.fiber(0) != 1:
        raise FibrationHypothesisError("connected fiber has b_0 = 1")
    if any(inp.fiber(j) for j in range(len(inp.fiber_betti)) if j not in (0, n)):
        raise FibrationHypothesisError(f"fiber homology outside degrees 0 and {n}")
    return n


def sphere_like_exact(inp: FibrationInput) -> FibrationReport:
    """``b2_i(E) = b2_i(B) + b_n(F) b2_{i-n}(B)`` for homology in degrees 0 and n."""
    _require_pi1(inp)
    n = _two_degree(inp)
    top = n + max(len(inp.base_l2), inp.base_dim + 1)
    vals = [inp.base(i) + inp.fiber(n) * inp.base(i - n) for i in range(top)]
    return FibrationReport(vals, "exact", "two-degree fiber")


_NONINFINITE_SURFACES = {"S2", "disk", "P2"}


def surface_base(inp: FibrationInput) -> FibrationReport:
    """``b2_i(E) = -chi(B) b_{i-1}(F)`` over a surface with infinite fundamental group."""
    _require_simply_connected(inp)
    chi = inp.flag("base_surface_euler")
    if chi is None:
        raise FibrationHypothesisError("needs base_surface_euler")
    name = inp.flag("base_surface")
    if name in _NONINFINITE_SURFACES or int(chi) > 0:
        raise FibrationHypothesisError("surface base with finite fundamental group (S2, disk, P2) excluded")
    chi = int(chi)
    vals = [Fraction(-chi * inp.fiber(i - 1)) for i in range(len(inp.fiber_betti) + 1)]
    return FibrationReport(vals, "exact", "surface base")


def singer_cases(inp: FibrationInput) -> FibrationReport:
    """Closed aspherical base satisfying the Singer property.

    Odd dimension gives zero; dimension ``2n`` gives ``b_{i-n}(F) b2_n(B)``,
    with positivity in degrees ``n + i`` for ``b_i(F) > 0`` under negative curvature.
    """
    _require_pi1(inp)
    if not inp.flag("base_aspherical_singer"):
        raise FibrationHypothesisError("needs base_aspherical_singer")
    d = inp.base_dim
    top = len(inp.fiber_betti) + d
    if d % 2 == 1:
        if any(inp.base_l2):
            raise FibrationHypothesisError("Singer property forces zero L2-Betti numbers in odd dimension")
        return FibrationReport([Fraction(0)] * top, "exact", "odd-dimensional Singer base")
    n = d // 2
    if any(inp.base(i) for i in range(len(inp.base_l2)) if i != n):
        raise FibrationHypothesisError(f"Singer property: base L2-Betti numbers vanish outside degree {n}")
    mid = inp.base(n)
    positive = []
    if inp.flag("base_negatively_curved"):
        if mid == 0:
            raise FibrationHypothesisError("negatively curved Singer base has positive middle L2-Betti number")
        positive = [n + i for i in range(len(inp.fiber_betti)) if inp.fiber(i) > 0]
    vals = [inp.fiber(i - n) * mid for i in range(top)]
    return FibrationReport(vals, "exact", "even-dimensional Singer base", positive)


def three_manifold_base(inp: FibrationInput) -> FibrationReport:
    """Zero profile over an orientable irreducible 3-manifold meeting one of the listed conditions."""
    _require_simply_connected(inp)
    if not inp.flag("base_3mfld_hypotheses"):
        raise FibrationHypothesisError("needs base_3mfld_hypotheses")
    return FibrationReport([Fraction(0)] * (len(inp.fiber_betti) + 3), "exact", "3-manifold base")


def bounded_by(exact: FibrationReport, bound: FibrationReport) -> bool:
    n = max(len(exact.values), len(bound.values))
    e = exact.values + [Fraction(0)] * (n - len(exact.values))
    b = bound.values + [Fraction(0)] * (n - len(bound.values))
    return all(x <= y for x, y in zip(e, b))


CLAUSES = {
    "bound": betti_bound,
    "two_degree": sphere_like_exact,
    "surface": surface_base,
    "singer": singer_cases,
    "three_manifold": three_manifold_base,
}


def evaluate(inp: FibrationInput, clause: str) -> FibrationReport:
    try:
        fn = CLAUSES[clause]
    except KeyError:
        raise FibrationHypothesisError(f"unknown clause {clause!r}; choose from {sorted(CLAUSES)}") from None
    return fn(inp)


def fibration_summary(inp: FibrationInput, clauses: Sequence[str]) -> dict:
    return {c: evaluate(inp, c).to_json() for c in clauses}
