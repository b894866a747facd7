from fractions import Fraction
from math import comb

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from fpairs import constructions as C
from fpairs.lattice import build_face_lattice
from fpairs.oracle import (
    CONJECTURED,
    FEASIBLE,
    INFEASIBLE,
    OUT_OF_RANGE,
    QueryError,
    barnette_bound,
    conjecture_region,
    dehn_sommerville_holds,
    ds_system_d6,
    feasible,
    g_theorem_holds,
    g_vector,
    h_vector,
    is_m_sequence,
    kalai_check,
    listed_exceptions,
    m_sequence_violation,
    macaulay_representation,
    necessary_conditions,
    phi,
    pseudo_power,
    refute_simple_pair_19_57,
    simple_classification,
)

# the excluded 6-pairs, written out by hand as an independent copy of the table
E6_OUT = {(n, 3 * n + 1) for n in range(7, 40)} | {
    (8, 24), (9, 27), (9, 29), (10, 30), (10, 32), (10, 34), (11, 33), (11, 36), (12, 38), (12, 39),
    (13, 39), (14, 42), (14, 44), (15, 47), (17, 53), (18, 54), (19, 57), (20, 62),
}


def in_band(d, f0, f1):
    return 2 * f1 >= d * f0 and f1 <= comb(f0, 2)


def test_query_errors():
    with pytest.raises(QueryError):
        feasible(2, 5, 5)
    with pytest.raises(QueryError):
        feasible(6, 6, 15)


def test_known_verdicts():
    assert feasible(6, 13, 43).status == FEASIBLE
    assert feasible(6, 11, 36).status == INFEASIBLE
    assert feasible(6, 14, 43).status == INFEASIBLE  # 3 f0 + 1
    assert feasible(5, 13, 35).status == INFEASIBLE
    assert feasible(5, 9, 23).status == INFEASIBLE  # floor(5 f0/2 + 1)
    assert feasible(4, 10, 20).status == INFEASIBLE
    assert feasible(4, 10, 21).status == FEASIBLE
    assert feasible(3, 8, 18).status == FEASIBLE
    assert feasible(3, 8, 19).status == INFEASIBLE


def test_d7_and_beyond():
    assert feasible(7, 12, 54).status == FEASIBLE
    assert feasible(7, 12, 67).status == INFEASIBLE
    assert feasible(7, 12, 47).status == OUT_OF_RANGE
    assert feasible(8, 14, 70).status == CONJECTURED
    assert feasible(8, 14, 57).status == OUT_OF_RANGE


def test_verdict_json_lists_rules():
    v = feasible(6, 19, 57).to_json()
    assert v["status"] == INFEASIBLE
    assert v["excess"] == 0
    assert [r["rule"] for r in v["reasons"]] == ["E6_sporadic"]
    w = feasible(6, 10, 50).to_json()
    assert "band" in [r["rule"] for r in w["diagnostics"]]


def test_listed_exceptions_d6():
    assert listed_exceptions(6, 25) == {p for p in E6_OUT if p[0] <= 25}


@given(st.integers(7, 30), st.integers(0, 450))
def test_d6_verdict_matches_the_hand_table(f0, f1):
    expected = in_band(6, f0, f1) and (f0, f1) not in E6_OUT
    assert feasible(6, f0, f1).admits == expected


@given(st.integers(6, 20), st.integers(0, 200))
def test_d5_verdict(f0, f1):
    out = {(8, 20), (9, 25), (13, 35)} | {(n, (5 * n) // 2 + 1) for n in range(7, 40)}
    expected = in_band(5, f0, f1) and (f0, f1) not in out
    assert feasible(5, f0, f1).admits == expected


@given(st.integers(5, 20), st.integers(0, 200))
def test_d4_verdict(f0, f1):
    out = {(6, 12), (7, 14), (8, 17), (10, 20)}
    assert feasible(4, f0, f1).admits == (in_band(4, f0, f1) and (f0, f1) not in out)


@given(st.integers(8, 16), st.integers(0, 130))
def test_d7_feasible_region_is_the_high_excess_band(f0, f1):
    v = feasible(7, f0, f1)
    if 2 * f1 - 7 * f0 > 11:
        assert v.admits == (f1 <= comb(f0, 2))
        assert v.admits == conjecture_region(7, f0, f1)
    else:
        assert v.status == OUT_OF_RANGE


@given(st.integers(4, 8), st.integers(1, 20), st.integers(0, 200))
def test_feasible_pairs_violate_no_necessary_condition(d, k, f1):
    f0 = d + k
    v = feasible(d, f0, f1)
    if v.status == FEASIBLE:
        assert necessary_conditions(d, f0, f1) == []


def test_phi_is_the_triplex_edge_count():
    # prism over a simplex and the simplex itself are the extremes
    assert phi(12, 6) == 36
    assert phi(7, 6) == 21
    for v in range(8, 13):
        assert phi(v, 6) == Fraction(6 * v, 2) + Fraction((v - 7) * (12 - v), 2)


def test_phi_matches_pyramid_towers_over_prisms():
    # pyramid over (pyramid over ... a prism) realizes phi
    P = C.gen_simplex_product([1, 3])
    P = C.op_pyramid(C.op_pyramid(P))
    L = build_face_lattice(P)
    assert L.fvector[1] == phi(L.fvector[0], 6)


# -- Dehn-Sommerville and the refutation ----------------------------------------------


def test_refutation_values():
    out = refute_simple_pair_19_57()
    assert out["f0_range"] == [8, 9]
    assert [r["f1"] for r in out["rows"]] == [Fraction(240, 7), Fraction(261, 7)]
    assert out["refuted"]


def test_eliminations_agree_with_a_symbolic_solve():
    # solve the three symmetry relations for f1, f2, f3 with f0, f4, f5 left free
    f0, f1, f2, f3, f4, f5 = sp.symbols("f0 f1 f2 f3 f4 f5")
    s = ds_system_d6(f0, f1, f2, f3, f4, f5)
    sol = sp.solve(list(s.relations.values()), [f1, f2, f3], dict=True)[0]
    closed = ds_system_d6(f0, 0, 0, 0, f4, f5).f1_elimination
    assert sp.simplify(sol[f1] - sp.nsimplify(closed)) == 0
    for n, want in ((8, sp.Rational(240, 7)), (9, sp.Rational(261, 7))):
        assert sol[f1].subs({f0: n, f4: 57, f5: 19}) == want


def test_barnette_bound():
    assert barnette_bound(6, 8) == 12
    assert barnette_bound(6, 9) == 17
    assert barnette_bound(6, 10) == 22


def test_h_vector_of_cyclic_polytopes():
    # h_k = C(n-d-1+k, k) for k <= d/2
    for n, d in [(8, 6), (10, 6), (9, 5), (8, 4)]:
        h = h_vector(build_face_lattice(C.gen_cyclic(n, d)).fvector)
        for k in range(d // 2 + 1):
            assert h[k] == comb(n - d - 1 + k, k)
        assert dehn_sommerville_holds(build_face_lattice(C.gen_cyclic(n, d)).fvector)


def test_g_theorem_on_simplicial_constructions():
    for P in (C.gen_cyclic(10, 6), C.op_connected_sum(C.gen_cyclic(8, 6), C.gen_simplex(6)), C.gen_simplex(5)):
        assert g_theorem_holds(build_face_lattice(P).fvector)
    assert g_vector(build_face_lattice(C.gen_simplex(6)).fvector) == [1, 0, 0, 0]


def test_macaulay_representation():
    assert macaulay_representation(5, 2) == [(3, 2), (2, 1)]
    assert macaulay_representation(0, 3) == []
    assert pseudo_power(3, 1) == 6
    assert pseudo_power(5, 2) == 7


@given(st.integers(0, 300), st.integers(1, 5))
def test_macaulay_sums_back(n, i):
    rep = macaulay_representation(n, i)
    assert sum(comb(a, k) for a, k in rep) == n
    ks = [k for _, k in rep]
    assert ks == list(range(i, i - len(ks), -1))
    avals = [a for a, _ in rep]
    assert all(x > y for x, y in zip(avals, avals[1:]))


def _brute_max_next(n, i):
    # largest m such that an order ideal of monomials has n of degree i and m of
    # degree i+1; the first n monomials in reverse-lex order are optimal, so count
    # the degree-(i+1) monomials all of whose divisors lie in that segment
    import itertools

    nv = n + 1
    mons = sorted(itertools.combinations_with_replacement(range(nv), i), key=lambda m: m[::-1])[:n]
    first = set(mons)
    nxt = set()
    for m in itertools.combinations_with_replacement(range(nv), i + 1):
        subs = {tuple(m[:j] + m[j + 1:]) for j in range(len(m))}
        if subs <= first:
            nxt.add(m)
    return len(nxt)


@pytest.mark.parametrize("n,i", [(1, 1), (2, 1), (3, 1), (4, 2), (5, 2), (7, 2), (3, 3), (6, 2)])
def test_pseudo_power_against_lex_segments(n, i):
    assert pseudo_power(n, i) == _brute_max_next(n, i)


def test_m_sequence_checks():
    assert is_m_sequence([1, 3, 6, 10])
    assert "exceeds" in m_sequence_violation([1, 2, 4])
    assert "negative" in m_sequence_violation([1, -1])


def test_kalai_on_constructions():
    for P in (C.gen_cube(4), C.gen_simplex_product([3, 3]), C.gen_cyclic(9, 6)):
        ok, slack = kalai_check(build_face_lattice(P))
        assert ok and slack >= 0
    # the simplex is tight
    assert kalai_check(build_face_lattice(C.gen_simplex(6))) == (True, 0)


def test_simple_classification():
    assert simple_classification(6, 7) == ["Delta_{0,6}"]
    assert simple_classification(6, 12) == ["Delta_{1,5}"]
    assert simple_classification(6, 13) == []
    assert simple_classification(6, 15) == ["Delta_{2,4}"]
    assert simple_classification(6, 16) == ["Delta_{3,3}"]
    assert simple_classification(6, 18) == []
    assert simple_classification(6, 30) is None
