"""Feasibility verdicts for (d, f0, f1) and the numeric checks behind them.

The characterizations are table-driven: a band of admissible edge counts,
minus known exceptional families and sporadic pairs.  Rule ids are stable
strings; the list lives in ``RULES``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, comb
from typing import Optional

from .lattice import FaceLattice, fpair, gon_census

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
CONJECTURED = "conjectured-feasible"
OUT_OF_RANGE = "out-of-characterized-range"

RULES = {
    "E3_band": "3-polytopes: 3/2 f0 <= f1 <= 3 f0 - 6 (Steinitz)",
    "E4_band": "4-polytopes: 2 f0 <= f1 <= C(f0,2)",
    "E4_exception": "4-polytopes: the four exceptional pairs (6,12), (7,14), (8,17), (10,20)",
    "E5_band": "5-polytopes: 5/2 f0 <= f1 <= C(f0,2)",
    "E5_family": "5-polytopes: no pair (f0, floor(5 f0/2 + 1)) for f0 >= 7",
    "E5_sporadic": "5-polytopes: sporadic exceptions (8,20), (9,25), (13,35)",
    "E6_band": "6-polytopes: 3 f0 <= f1 <= C(f0,2)",
    "E6_family": "6-polytopes: no pair (f0, 3 f0 + 1) for f0 >= 7",
    "E6_sporadic": "6-polytopes: sporadic exceptions of the characterization",
    "E6_11_36": "6-polytopes: 11 vertices and 36 edges is neither a triplex nor of large enough excess",
    "E7_high_excess": "7-polytopes with excess > 11: every pair with f1 <= C(f0,2) occurs",
    "E7_band": "7-polytopes with excess > 11: f1 must not exceed C(f0,2)",
    "conjecture_high_excess": "conjectured: d-polytopes with excess > 3d-10 realize every pair with f1 <= C(f0,2)",
    "out_of_range": "no characterization covers this pair",
    "band": "d/2 f0 <= f1 <= C(f0,2)",
    "excess_gap": "excess degree is never strictly between 0 and d-2",
    "phi_bound": "at most 2d vertices forces f1 >= phi(f0, d)",
    "phi_plus_one": "no d-polytope (d >= 4) with d+4 vertices and phi(d+4, d) + 1 edges",
    "nontriplex": "d+k vertices (4 <= k <= d), not a triplex: excess >= (k-1)(d-k) + 2(k-3)",
}

E4_EXCEPTIONS = {(6, 12), (7, 14), (8, 17), (10, 20)}
E5_SPORADIC = {(8, 20), (9, 25), (13, 35)}
E6_SPORADIC = {
    (8, 24), (9, 27), (9, 29), (10, 30), (10, 32), (10, 34), (11, 33), (12, 38), (12, 39),
    (13, 39), (14, 42), (14, 44), (15, 47), (17, 53), (18, 54), (19, 57), (20, 62),
}
# not in the displayed exception list, but ruled out by the non-triplex excess bound
E6_EXTRA = {(11, 36)}

SPORADIC_NOTES = {
    (8, 24): "simple 6-polytopes with fewer than 12 vertices are simplices",
    (9, 27): "simple 6-polytopes with fewer than 12 vertices are simplices",
    (10, 30): "simple 6-polytopes with fewer than 12 vertices are simplices",
    (11, 33): "simple 6-polytopes with fewer than 12 vertices are simplices",
    (9, 29): "below the phi bound",
    (10, 32): "below the phi bound",
    (10, 34): "the (d+4, phi+1) exclusion",
    (12, 38): "non-triplex excess bound",
    (13, 39): "the only simple 6-polytope with 12..14 vertices is the prism over a simplex",
    (14, 42): "the only simple 6-polytope with 12..14 vertices is the prism over a simplex",
    (18, 54): "no simple 6-polytope has 18 vertices",
    (19, 57): "lower bound on facets plus the Dehn-Sommerville elimination (refute_simple_pair_19_57)",
}


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class Reason:
    rule: str
    cite: str

    def to_json(self) -> dict:
        return {"rule": self.rule, "cite": self.cite}


@dataclass
class Verdict:
    d: int
    f0: int
    f1: int
    status: str
    reasons: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    witness_hint: Optional[object] = None  # a Recipe, when the planner attaches one

    @property
    def excess(self) -> int:
        return 2 * self.f1 - self.d * self.f0

    @property
    def admits(self) -> bool:
        return self.status in (FEASIBLE, CONJECTURED)

    def to_json(self) -> dict:
        out = {
            "query": {"d": self.d, "f0": self.f0, "f1": self.f1},
            "status": self.status,
            "excess": self.excess,
            "reasons": [r.to_json() for r in self.reasons],
        }
        if self.diagnostics:
            out["diagnostics"] = [r.to_json() for r in self.diagnostics]
        if self.witness_hint is not None:
            out["witness_hint"] = self.witness_hint.to_json()
        return out


def _reason(rule: str, extra: str = "") -> Reason:
    cite = RULES[rule]
    if extra:
        cite = f"{cite}; {extra}"
    return Reason(rule, cite)


def phi(v: int, d: int) -> Fraction:
    """Minimum edge count of a d-polytope with v <= 2d vertices (triplex count)."""
    return Fraction(d * v, 2) + Fraction((v - d - 1) * (2 * d - v), 2)


def necessary_conditions(d: int, f0: int, f1: int) -> list[Reason]:
    """Every violated universal condition; empty means no obstruction found."""
    out = []
    eps = 2 * f1 - d * f0
    if f1 < ceil(Fraction(d * f0, 2)) or f1 > comb(f0, 2):
        out.append(_reason("band"))
    if 0 < eps < d - 2:
        out.append(_reason("excess_gap", f"excess {eps}"))
    if f0 <= 2 * d and f1 < phi(f0, d):
        out.append(_reason("phi_bound", f"phi({f0},{d}) = {phi(f0, d)}"))
    if d >= 4 and f0 == d + 4 and f1 == phi(d + 4, d) + 1:
        out.append(_reason("phi_plus_one"))
    k = f0 - d
    if 4 <= k <= d and f1 != phi(f0, d):
        need = (k - 1) * (d - k) + 2 * (k - 3)
        if eps < need and f1 >= phi(f0, d):
            out.append(_reason("nontriplex", f"excess {eps} < {need}"))
    return out


def _band(d, f0, f1) -> bool:
    return Fraction(d * f0, 2) <= f1 <= comb(f0, 2)


def _excluding_rules(d: int, f0: int, f1: int) -> list[str]:
    """Every characterization rule (d = 4, 5, 6) that excludes the pair."""
    out = []
    if not _band(d, f0, f1):
        out.append(f"E{d}_band")
    if d == 4 and (f0, f1) in E4_EXCEPTIONS:
        out.append("E4_exception")
    if d == 5:
        if f0 >= 7 and f1 == (5 * f0 + 2) // 2:
            out.append("E5_family")
        if (f0, f1) in E5_SPORADIC:
            out.append("E5_sporadic")
    if d == 6:
        if f0 >= 7 and f1 == 3 * f0 + 1:
            out.append("E6_family")
        if (f0, f1) in E6_SPORADIC:
            out.append("E6_sporadic")
        if (f0, f1) in E6_EXTRA:
            out.append("E6_11_36")
    return out


def listed_exceptions(d: int, f0_max: int) -> set[tuple]:
    """The exceptional pairs the characterizations list explicitly (family
    members and sporadics), whether or not they fall inside the band."""
    if d == 4:
        return {p for p in E4_EXCEPTIONS if p[0] <= f0_max}
    if d == 5:
        fam = {(n, (5 * n + 2) // 2) for n in range(7, f0_max + 1)}
        return fam | {p for p in E5_SPORADIC if p[0] <= f0_max}
    if d == 6:
        fam = {(n, 3 * n + 1) for n in range(7, f0_max + 1)}
        return fam | {p for p in E6_SPORADIC | E6_EXTRA if p[0] <= f0_max}
    return set()


def feasible(d: int, f0: int, f1: int) -> Verdict:
    if d < 3 or f0 <= d:
        raise QueryError("not a polytope query")
    v = Verdict(d, f0, f1, INFEASIBLE)
    eps = 2 * f1 - d * f0
    if d == 3:
        ok = Fraction(3 * f0, 2) <= f1 <= 3 * f0 - 6
        v.status = FEASIBLE if ok else INFEASIBLE
        v.reasons.append(_reason("E3_band"))
    elif d in (4, 5, 6):
        for rule in _excluding_rules(d, f0, f1):
            extra = SPORADIC_NOTES.get((f0, f1), "") if rule == "E6_sporadic" else ""
            v.reasons.append(_reason(rule, extra))
        if not v.reasons:
            v.status = FEASIBLE
            v.reasons.append(_reason(f"E{d}_band"))
    elif d == 7:
        if eps > 11:
            if f1 <= comb(f0, 2):
                v.status = FEASIBLE
                v.reasons.append(_reason("E7_high_excess"))
            else:
                v.reasons.append(_reason("E7_band"))
        else:
            v.status = OUT_OF_RANGE
            v.reasons.append(_reason("out_of_range", f"excess {eps} <= 11"))
    else:
        if eps > 3 * d - 10 and f1 <= comb(f0, 2):
            v.status = CONJECTURED
            v.reasons.append(_reason("conjecture_high_excess"))
        else:
            v.status = OUT_OF_RANGE
            v.reasons.append(_reason("out_of_range", f"excess {eps}, threshold {3 * d - 10}"))
    if v.status != FEASIBLE:
        v.diagnostics = necessary_conditions(d, f0, f1)
    return v


def conjecture_region(d: int, f0: int, f1: int) -> bool:
    """d/2 f0 + (3d-10)/2 < f1 <= C(f0,2)."""
    return Fraction(d * f0, 2) + Fraction(3 * d - 10, 2) < f1 <= comb(f0, 2)


# -- Dehn-Sommerville, as printed for d = 6 -----------------------------------


@dataclass(frozen=True)
class HVectorSystem:
    d: int
    h: tuple  # h_0 .. h_6
    relations: dict  # name -> (lhs - rhs)
    f2_from_h1h6_h2h5: object
    f2_from_h3h4_h2h5: object
    f1_elimination: object

    def relations_hold(self) -> bool:
        return all(x == 0 for x in self.relations.values())


def ds_system_d6(f0, f1, f2, f3, f4, f5) -> HVectorSystem:
    """The six h-expressions with binomials C(7-i, 7-k), f_{-1} = 1.

    Entries may be ints, Fractions, or symbolic (anything supporting + - *).
    The eliminations are the closed forms obtained by equating h1 = h6,
    h2 = h5 and h3 = h4.
    """
    h0 = 1
    h1 = -7 + f0
    h2 = 21 - 6 * f0 + f1
    h3 = -35 + 15 * f0 - 5 * f1 + f2
    h4 = 35 - 20 * f0 + 10 * f1 - 4 * f2 + f3
    h5 = -21 + 15 * f0 - 10 * f1 + 6 * f2 - 3 * f3 + f4
    h6 = 7 - 6 * f0 + 5 * f1 - 4 * f2 + 3 * f3 - 2 * f4 + f5
    rel = {"h1=h6": h1 - h6, "h2=h5": h2 - h5, "h3=h4": h3 - h4}
    half, ninth, fourteenth = Fraction(1, 2), Fraction(1, 9), Fraction(1, 14)
    f2a = half * (28 - 14 * f0 + 6 * f1 + f4 - f5)
    f2b = ninth * (168 - 84 * f0 + 34 * f1 + f4)
    f1e = fourteenth * (-84 + 42 * f0 + 7 * f4 - 9 * f5)
    return HVectorSystem(6, (h0, h1, h2, h3, h4, h5, h6), rel, f2a, f2b, f1e)


def barnette_bound(d: int, f0: int) -> int:
    """Lower bound on facets of a simplicial d-polytope with f0 vertices."""
    return (d - 1) * f0 - (d + 1) * (d - 2)


def barnette_check(d: int, f0: int, fd_minus_1: int) -> bool:
    return fd_minus_1 >= barnette_bound(d, f0)


def refute_simple_pair_19_57() -> dict:
    """Why no simple 6-polytope has 19 vertices and 57 edges.

    Its dual is simplicial with f5 = 19 facets and f4 = 57 ridges.  The facet
    lower bound 19 >= 5 f0 - 28 leaves f0 in {8, 9} (f0 = 7 is the simplex,
    which has 7 facets), and the printed elimination then forces a
    non-integral f1 for both.
    """
    f4, f5 = 57, 19
    d = 6
    candidates = [n for n in range(d + 1, 64) if barnette_check(d, n, f5) and n != d + 1]
    rows = []
    for n in candidates:
        f1 = ds_system_d6(n, 0, 0, 0, f4, f5).f1_elimination
        rows.append({"f0": n, "f1": f1, "integral": f1.denominator == 1})
    return {
        "f4": f4,
        "f5": f5,
        "f0_range": candidates,
        "rows": rows,
        "refuted": all(not r["integral"] for r in rows),
    }


# -- standard h / g machinery for simplicial polytopes ---------------------------


def h_vector(fvector) -> list[int]:
    """Standard h-vector of a simplicial d-polytope from (f_0, ..., f_{d-1})."""
    d = len(fvector)
    f = [1] + list(fvector)  # f[i] = f_{i-1}
    return [sum((-1) ** (k - i) * comb(d - i, k - i) * f[i] for i in range(k + 1)) for k in range(d + 1)]


def g_vector(fvector) -> list[int]:
    h = h_vector(fvector)
    d = len(fvector)
    return [h[0]] + [h[i] - h[i - 1] for i in range(1, d // 2 + 1)]


def dehn_sommerville_holds(fvector) -> bool:
    h = h_vector(fvector)
    return all(h[i] == h[len(h) - 1 - i] for i in range(len(h)))


def macaulay_representation(n: int, i: int) -> list[tuple[int, int]]:
    """The i-canonical representation n = C(a_i, i) + C(a_{i-1}, i-1) + ...,
    a_i > a_{i-1} > ... >= j >= 1, as a list of (a, k)."""
    out = []
    k = i
    while n > 0 and k >= 1:
        a = k
        while comb(a + 1, k) <= n:
            a += 1
        out.append((a, k))
        n -= comb(a, k)
        k -= 1
    return out


def pseudo_power(n: int, i: int) -> int:
    """n^<i>: the largest possible next entry of an M-sequence after n at degree i."""
    if n == 0:
        return 0
    return sum(comb(a + 1, k + 1) for a, k in macaulay_representation(n, i))


def m_sequence_violation(g) -> Optional[str]:
    g = list(g)
    for i, x in enumerate(g):
        if x < 0:
            return f"negative entry g_{i} = {x}"
    if not g:
        return None
    if g[0] == 0 and any(g[1:]):
        return "g_0 = 0 but a later entry is nonzero"
    for i in range(1, len(g) - 1):
        bound = pseudo_power(g[i], i)
        if g[i + 1] > bound:
            return f"g_{i + 1} = {g[i + 1]} exceeds g_{i}^<{i}> = {bound}"
    return None


def is_m_sequence(g) -> bool:
    return m_sequence_violation(g) is None


def g_theorem_holds(fvector) -> bool:
    """Dehn-Sommerville plus the M-sequence condition on the g-vector."""
    return dehn_sommerville_holds(fvector) and is_m_sequence(g_vector(fvector))


# -- lattice-level checks ----------------------------------------------------------


def kalai_slack(L: FaceLattice) -> int:
    p = fpair(L)
    lhs = p.f1 + sum((k - 3) * c for k, c in gon_census(L).items())
    return lhs - (L.dim * p.f0 - comb(L.dim + 1, 2))


def kalai_check(L: FaceLattice) -> tuple[bool, int]:
    s = kalai_slack(L)
    return s >= 0, s


def kalai_bound(d: int, n: int) -> int:
    return d * n - comb(d + 1, 2)


def simple_classification(d: int, f0: int) -> Optional[list[str]]:
    """Simple d-polytopes with f0 vertices, for f0 <= 3d; None beyond that."""
    if f0 < 2 * d:
        return ["Delta_{0,%d}" % d] if f0 == d + 1 else []
    if f0 <= 3 * d - 4:
        return ["Delta_{1,%d}" % (d - 1)] if f0 == 2 * d else []
    if f0 == 3 * d - 3:
        return ["Delta_{2,%d}" % (d - 2)]
    if f0 == 3 * d - 2:
        return ["Delta_{3,3}"] if d == 6 else []
    if f0 == 3 * d - 1:
        out = ["J_%d" % d]
        if d == 3:
            out.append("Delta_{1,1,1}")
        if d == 7:
            out.append("Delta_{3,4}")
        return out
    if f0 == 3 * d:
        if d == 4:
            return ["Delta_{1,1,2}", "Gamma_{2,2}"]
        if d == 8:
            return ["Delta_{3,5}"]
        return []
    return None
