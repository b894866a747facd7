from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpairs import constructions as C
from fpairs.constructions import (
    PreconditionError,
    Recipe,
    RecipeInvalid,
    cube,
    cyclic,
    join,
    predict,
    product,
    recipe,
    simplex,
    step,
)
from fpairs.lattice import fpair, simplex_facets, simple_vertices


def pair_of(P):
    return fpair(C.lattice_of(P)).as_tuple()


def fv_of(P):
    return C.lattice_of(P).fvector


def run(r):
    return C.lattice_of(C.execute(r))


# -- generators ----------------------------------------------------------------------


@pytest.mark.parametrize("d,expected", [(6, (7, 21)), (5, (6, 15)), (7, (8, 28))])
def test_simplex_pairs(d, expected):
    assert pair_of(C.gen_simplex(d)) == expected


def test_generator_dimension_range():
    with pytest.raises(ValueError):
        C.gen_simplex(8)
    with pytest.raises(ValueError):
        C.gen_cyclic(6, 6)
    with pytest.raises(ValueError, match="collision"):
        C.gen_cyclic(7, 6, params=[0, 1, 2, 3, 4, 5, 5])
    with pytest.raises(ValueError, match="overflow"):
        C.gen_simplex_product([4, 4])


def test_cyclic_pairs():
    assert pair_of(C.gen_cyclic(7, 6)) == (7, 21)
    P = C.gen_cyclic(8, 6)
    assert pair_of(P) == (8, 28)
    assert fv_of(P)[5] == 16
    assert pair_of(C.gen_cyclic(6, 5)) == (6, 15)


@pytest.mark.parametrize("dims,expected", [((1, 5), (12, 36)), ((2, 4), (15, 45)), ((3, 3), (16, 48)),
                                           ((1, 1, 1, 1), (16, 32))])
def test_simplex_products(dims, expected):
    assert pair_of(C.gen_simplex_product(dims)) == expected


def test_cube_matches_the_product_of_segments():
    assert fv_of(C.gen_cube(4)) == fv_of(C.gen_simplex_product([1, 1, 1, 1]))


def test_join_of_square_and_tetrahedron():
    P = C.gen_join(C.gen_cyclic(4, 2, low_ok=True), C.gen_simplex(3))
    fv = fv_of(P)
    assert P.dim == 6
    assert (fv[5], fv[4]) == (8, 26)


def _join_convolution(fa, fb):
    a = [1] + list(fa) + [1]  # f_-1 .. f_da (the polytope itself)
    b = [1] + list(fb) + [1]
    d = len(fa) + len(fb) + 1
    out = []
    for k in range(d):
        out.append(sum(a[i + 1] * b[k - i] for i in range(-1, k + 1) if 0 <= i + 1 < len(a) and 0 <= k - i < len(b)))
    return tuple(out)


@pytest.mark.parametrize("A,B", [
    (lambda: C.gen_simplex(1, low_ok=True), lambda: C.gen_simplex(2, low_ok=True)),
    (lambda: C.gen_cyclic(5, 2, low_ok=True), lambda: C.gen_cyclic(6, 3)),
    (lambda: C.gen_cyclic(4, 2, low_ok=True), lambda: C.gen_simplex(3)),
])
def test_join_fvector_is_the_convolution(A, B):
    a, b = A(), B()
    fa = fv_of(a) if a.dim > 1 else (2,)
    fb = fv_of(b)
    J = C.gen_join(a, b)
    assert fv_of(J) == _join_convolution(fa, fb)


# -- operators ----------------------------------------------------------------------


def test_pyramid_law():
    assert pair_of(C.op_pyramid(C.gen_simplex(5))) == (7, 21)
    assert pair_of(C.op_pyramid(C.gen_simplex_product([1, 4]))) == (11, 35)


def test_pyramid_keeps_the_base_as_a_facet():
    base = C.gen_cyclic(7, 4)
    P = C.op_pyramid(base)
    L = C.lattice_of(P)
    n = base.nvertices
    assert tuple(range(n)) in L.facets
    # each simplex ridge of the base is the foot of a simplex facet over the apex
    assert len(simplex_facets(L)) == len(simplex_facets(C.lattice_of(base)))


def test_facet_pyramids():
    P = C.op_pyramid_over_facet(C.gen_simplex(6))
    assert pair_of(P) == (8, 27)
    Q = C.op_pyramid_over_facet(C.gen_cube(3), "first")
    assert pair_of(Q) == (9, 16)


def test_truncations():
    s = C.gen_simplex(6)
    t = C.op_truncate_simple_vertex(s)
    assert pair_of(t) == (12, 36)
    assert fv_of(t) == fv_of(C.gen_simplex_product([1, 5]))
    u = C.op_truncate_simple_vertex(C.op_pyramid_over_facet(s))
    assert pair_of(u) == (13, 42)
    assert pair_of(C.op_pyramid_over_facet(u)) == (14, 48)
    assert pair_of(C.op_truncate_simple_edge(C.gen_simplex_product([3, 3]))) == (24, 72)


def test_vertex_truncation_leaves_a_simple_simplex_facet():
    P = C.op_truncate_simple_vertex(C.op_pyramid_over_facet(C.gen_simplex(5)))
    L = C.lattice_of(P)
    sv = simple_vertices(L)
    assert any(all(v in sv for v in F) for F in simplex_facets(L))


def test_preconditions():
    with pytest.raises(PreconditionError, match="no simple vertex"):
        C.op_truncate_simple_vertex(C.gen_cyclic(8, 6))
    with pytest.raises(PreconditionError, match="no simple edge"):
        C.op_truncate_simple_edge(C.gen_cyclic(8, 6))
    with pytest.raises(PreconditionError, match="no simplex facet"):
        C.op_pyramid_over_facet(C.gen_cube(4))


def test_connected_sum_of_cyclic_polytopes():
    A, B = C.gen_cyclic(7, 6), C.gen_cyclic(8, 6)
    S = C.op_connected_sum(A, B)
    fv = fv_of(S)
    assert fv[:2] == (9, 34)
    # both summands simplicial: facets F_A + F_B - 2, ridges R_A + R_B - d
    assert fv[5] == 7 + 16 - 2
    assert fv[4] == fv_of(A)[4] + fv_of(B)[4] - 6


def test_sum_of_two_simplices_has_2d_facets():
    S = C.op_connected_sum(C.gen_simplex(5), C.gen_simplex(5))
    assert fv_of(S)[4] == 10


def test_polar_dual_reverses_fvector():
    P = C.gen_simplex_product([3, 3])
    assert fv_of(C.op_polar_dual(P)) == tuple(reversed(fv_of(P)))


def test_stacking_beyond_faces_matches_the_count():
    P = C.gen_cyclic(8, 4)
    L = C.lattice_of(P)
    for k in (1, 2, 3):
        for j, face in enumerate(C.faces_for_stacking(L, k)[:4]):
            Q = C.op_stack_over_face(P, k, j)
            assert pair_of(Q) == C.stack_effect(L, face)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(8, 4), (7, 4), (9, 5)]), st.integers(1, 3), st.integers(0, 30), st.integers(0, 6))
def test_ray_placements_match_beneath_beyond(nd, k, j, depth):
    n, d = nd
    P = C.gen_cyclic(n, d)
    L = C.lattice_of(P)
    faces = C.faces_for_stacking(L, k)
    j %= len(faces)
    stops = C.ray_stops(P, C.mask_of(faces[j]))
    depth %= len(stops)
    Q = C.op_stack_over_face(P, k, j, depth)
    predicted = C.placement_fvector(L, stops[depth][1])
    assert fv_of(Q) == tuple(predicted[i] for i in range(d))


def test_stacking_rejects_vertices_and_missing_faces():
    P = C.gen_cyclic(7, 4)
    with pytest.raises(RecipeInvalid):
        C.op_stack_over_face(P, 0, 0)
    with pytest.raises(PreconditionError):
        C.op_stack_over_face(P, 1, 999)


# -- recipes and laws ------------------------------------------------------------------


def test_recipe_json_round_trip_and_replay():
    r = recipe(product(3, 3), step("truncate_simple_edge"))
    text = r.dumps()
    r2 = Recipe.loads(text)
    assert r2 == r
    assert C.execute(r2) == C.execute(r)
    assert '"predicted"' in text


def test_recipe_json_shape():
    obj = recipe(product(3, 3), step("truncate_simple_edge")).to_json()
    assert obj["seed"] == {"kind": "simplex_product", "dims": [3, 3]}
    assert obj["steps"] == [{"op": "truncate_simple_edge", "select": "first"}]


def test_bad_recipe_json():
    with pytest.raises(RecipeInvalid):
        Recipe.loads('{"dimension": 6, "seed": {"kind": "torus", "dim": 6}, "steps": []}')
    with pytest.raises(RecipeInvalid):
        Recipe.loads('{"dimension": 6, "seed": {"kind": "simplex", "dim": 6}, "steps": [{"op": "twist"}]}')


@pytest.mark.parametrize("r,expected", [
    (recipe(simplex(6), step("pyramid_over_facet"), step("truncate_simple_vertex"), step("pyramid_over_facet")), (14, 48)),
    (recipe(cyclic(9, 6)), (9, 36)),
    (recipe(product(3, 3), step("truncate_simple_edge")), (24, 72)),
    (recipe(product(2, 4), step("truncate_simple_edge")), (23, 69)),
    (recipe(simplex(6), step("pyramid_over_facet"), step("truncate_simple_vertex"), step("pyramid_over_facet"),
            step("truncate_simple_vertex")), (19, 63)),
    (recipe(product(1, 4), step("pyramid")), (11, 35)),
    (recipe(cyclic(7, 6), step("connected_sum", other=recipe(cyclic(8, 6))), step("polar_dual")), (21, 63)),
    (recipe(join(recipe(cyclic(4, 2)), recipe(simplex(3)))), (8, 26)),
])
def test_law_agrees_with_geometry(r, expected):
    p = predict(r)
    assert not p.recount_required
    assert p.fpair.as_tuple() == expected
    L = run(r)
    assert fpair(L).as_tuple() == expected
    assert L.fvector == p.state.fvector


def test_edge_truncation_outside_d6_is_flagged():
    r = recipe(cube(4), step("truncate_simple_edge"))
    assert predict(r).recount_required
    assert fpair(run(r)).as_tuple() == (20, 40)


def test_law_rejects_provably_bad_recipes():
    with pytest.raises(RecipeInvalid):
        predict(recipe(cyclic(8, 6), step("truncate_simple_vertex")))
    with pytest.raises(RecipeInvalid):
        predict(recipe(cube(6), step("pyramid_over_facet")))


def test_pyramid_over_simplex_leaves_no_simple_edge():
    st_ = predict(recipe(simplex(6), step("pyramid_over_facet"))).state
    assert st_.has_simple_edge is False
    with pytest.raises(RecipeInvalid):
        predict(recipe(simplex(6), step("pyramid_over_facet"), step("truncate_simple_edge")))


def test_observers_see_every_construction():
    seen = []
    C.add_observer(seen.append)
    try:
        C.op_pyramid(C.gen_simplex(4))
    finally:
        C.remove_observer(seen.append)
    assert [P.dim for P in seen] == [4, 5]


def test_fvector_laws_match_the_binomials():
    s = predict(recipe(simplex(6), step("truncate_simple_vertex"))).state
    assert s.fvector[1] == 21 + comb(6, 2)


def test_deep_ray_placement_drops_swallowed_vertices():
    P = C.gen_cyclic(7, 4)
    L = C.lattice_of(P)
    face = C.faces_for_stacking(L, 1)[6]
    stops = C.ray_stops(P, C.mask_of(face))
    Q = C.op_stack_over_face(P, 1, 6, 3)
    fv = C.placement_fvector(L, stops[3][1])
    assert fv[0] < 8  # at least one old vertex is gone
    assert fv_of(Q) == tuple(fv[i] for i in range(4))
