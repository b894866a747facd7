import dataclasses
import json

import pytest

from fpairs import constructions as C
from fpairs.constructions import Recipe, cube, cyclic, product, recipe, simplex, step
from fpairs.lattice import build_face_lattice
from fpairs.planner import (
    Budget,
    CertificationFailed,
    CertifiedWitness,
    LawViolation,
    NoPlanFound,
    band,
    candidates,
    certify,
    closure,
    construct,
    invariant_checks,
    plan,
    seeds,
    table,
    write_bundle,
)


def test_certify_returns_a_witness():
    w = certify(recipe(product(2, 4)), (15, 45))
    assert isinstance(w, CertifiedWitness)
    assert w.fpair.as_tuple() == (15, 45)
    assert w.checks == ["euler", "degree-min", "balinski", "kalai"]
    cert = w.certificate()
    assert cert["facet_checksum"]["value"] == w.lattice.facet_checksum()
    assert cert["recipe"] == "Delta_{2,4}"


def test_certify_rejects_a_wrong_target():
    with pytest.raises(CertificationFailed, match="not"):
        certify(recipe(product(2, 4)), (15, 46))


def test_certify_flags_a_false_recorded_count():
    # a recount-required recipe carries the count the planner saw; a wrong one is a law violation
    r = recipe(cube(4), step("truncate_simple_edge"))
    bad = Recipe(r.dim, r.seed, r.steps, (20, 41))
    with pytest.raises(LawViolation):
        certify(bad)
    assert certify(Recipe(r.dim, r.seed, r.steps, (20, 40))).fpair.as_tuple() == (20, 40)


def test_invariant_checks_on_a_simplex():
    assert all(invariant_checks(build_face_lattice(C.gen_simplex(6))).values())


def test_seeds_cover_products_cyclics_and_joins():
    labels = [r.label() for r in seeds(6, 16)]
    assert "simplex(6)" in labels
    assert "Delta_{3,3}" in labels
    assert "cyclic(9,6)" in labels
    assert any(x.startswith("join(") for x in labels)


def test_closure_respects_bounds():
    nodes = closure(6, 14, 48)
    assert nodes
    for n in nodes:
        f0, f1 = n.state.pair
        fv = n.state.fvector
        # a state is kept when it or its polar dual fits
        assert (f0 <= 14 and f1 <= 48) or (fv[-1] <= 14 and fv[-2] <= 48)


def test_plan_finds_law_backed_recipes_first():
    r = plan(6, 14, 48)
    p = C.predict(r)
    assert p.fpair.as_tuple() == (14, 48)
    assert not p.recount_required


def test_every_candidate_predicts_the_target():
    for i, r in enumerate(candidates(6, 14, 48)):
        if i >= 6:
            break
        p = C.predict(r)
        if p.fpair is not None:
            assert p.fpair.as_tuple() == (14, 48)
        else:
            assert tuple(r.expected) == (14, 48)


@pytest.mark.parametrize("q", [(6, 13, 42), (6, 15, 49), (5, 11, 53), (4, 9, 34), (6, 17, 57)])
def test_construct_certifies(q):
    w = construct(*q)
    assert isinstance(w, CertifiedWitness), w.summary()
    assert w.fpair.as_tuple() == q[1:]
    assert w.fpair.d == q[0]


def test_stacking_probe_recipes_replay():
    w = construct(5, 11, 53)
    assert any(s.op == "stack_over_face" for s in w.recipe.steps)
    again = Recipe.loads(w.recipe.dumps())
    assert C.execute(again) == w.polytope


def test_no_plan_found_is_falsy_and_reports():
    out = construct(6, 13, 43, Budget(max_length=1, max_probes=0, max_certify=3))
    assert isinstance(out, NoPlanFound)
    assert not out
    js = out.to_json()
    assert js["status"] == "no-plan-found"
    assert "states_explored" in js["frontier"]
    assert "no recipe found" in out.summary()


def test_band():
    assert list(band(3, 6)) == [9, 10, 11, 12]
    assert band(6, 7) == range(21, 22)


def test_table_verdicts_only():
    rows = table(6, 9)
    pairs = {(r.f0, r.f1) for r in rows}
    assert (8, 25) in pairs and (8, 24) in pairs
    with pytest.raises(ValueError):
        table(8, 10)


def test_table_with_certification():
    rows = table(6, 8, certify_witnesses=True)
    feas = [r for r in rows if r.verdict.admits]
    assert feas and all(r.witness == "certified" for r in feas)
    assert all(r.witness is None for r in rows if not r.verdict.admits)


def test_bundle_files(tmp_path):
    w = construct(6, 12, 36)
    paths = write_bundle(w, str(tmp_path / "b"))
    names = sorted(p.rsplit("/", 1)[1] for p in paths)
    assert names == ["certificate.json", "recipe.json", "witness.json"]
    cert = json.loads((tmp_path / "b" / "certificate.json").read_text())
    assert cert["fpair"]["f0"] == 12 and cert["fpair"]["f1"] == 36
    rec = Recipe.loads((tmp_path / "b" / "recipe.json").read_text())
    assert rec == w.recipe


def test_law_violation_is_never_swallowed(monkeypatch):
    # break a transition law: the recount must catch it as a law violation, not a plain failure
    real = C.law_truncate_simple_vertex

    def wrong(s):
        out = real(s)
        fv = list(out.fvector)
        fv[1] += 1
        return dataclasses.replace(out, fvector=tuple(fv), pair=(fv[0], fv[1]))

    monkeypatch.setattr(C, "law_truncate_simple_vertex", wrong)
    with pytest.raises(LawViolation):
        certify(recipe(simplex(6), step("truncate_simple_vertex")))


def test_cyclic_witness_is_neighborly():
    w = certify(recipe(cyclic(10, 6)), (10, 45))
    assert w.lattice.graph.degrees == [9] * 10


def test_invariants_hold_for_low_dimensional_join_factors():
    for P in (C.gen_cyclic(6, 2, low_ok=True), C.gen_simplex(1, low_ok=True), C.gen_simplex(2, low_ok=True)):
        assert all(invariant_checks(C.lattice_of(P)).values())
