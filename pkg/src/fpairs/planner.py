"""Search the construction algebra for a recipe hitting a target pair, then
execute it and certify the result.

Search has four stages, cheapest first:

1. a breadth-first closure over abstract states driven by the transition
   laws (seeds, then chains of facet pyramids, truncations, sums);
2. stacking probes: execute law-reachable bases near the target and count,
   on the actual face lattice, what placing a new point beyond one face (or
   further out along the ray from the centre through it) would give;
3. truncation probes: the same placements in the polar dual, read back as
   cuts of the original;
4. a pyramid over a recursively planned witness one dimension down.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from math import ceil, comb
from typing import Iterator, Optional

from . import constructions as C
from .constructions import (
    AbstractState,
    ConstructionError,
    Recipe,
    RecipeInvalid,
    lattice_of,
    predict,
    recipe,
    seed_state,
    step,
)
from .geometry import VPolytope
from .lattice import (
    FaceLattice,
    FPair,
    LatticeError,
    euler_characteristic,
    fpair,
    vertex_connectivity_at_least,
)
from .oracle import feasible, kalai_check, listed_exceptions


class LawViolation(AssertionError):
    """Geometry disagrees with a law-backed prediction: a bug or a bad recipe."""


class CertificationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class Budget:
    max_length: int = 8  # moves per recipe (a vertex sum counts as one move)
    max_seeds: int = 200  # generator seeds per dimension
    max_lifted: int = 5000  # pyramid bases lifted from one dimension down
    max_probes: int = 60  # bases executed for stacking probes
    max_certify: int = 25  # candidates tried by construct()


DEFAULT_BUDGET = Budget()


@dataclass
class NoPlanFound:
    d: int
    f0: int
    f1: int
    frontier: dict = field(default_factory=dict)

    def __bool__(self):
        return False

    def summary(self) -> str:
        parts = [f"no recipe found for (d={self.d}, f0={self.f0}, f1={self.f1})"]
        for k, v in self.frontier.items():
            parts.append(f"  {k}: {v}")
        return "\n".join(parts)

    def to_json(self) -> dict:
        return {"query": {"d": self.d, "f0": self.f0, "f1": self.f1}, "status": "no-plan-found",
                "frontier": self.frontier}


@dataclass
class CertifiedWitness:
    recipe: Recipe
    polytope: VPolytope
    lattice: FaceLattice
    fpair: FPair
    checks: list  # names of passed invariant checks
    kalai_slack: int = 0

    def certificate(self) -> dict:
        return {
            "fpair": self.fpair.to_json(),
            "fvector": list(self.lattice.fvector),
            "checks": list(self.checks),
            "kalai_slack": self.kalai_slack,
            "facet_checksum": {
                "algorithm": "sha256",
                "input": "compact JSON of the facets as sorted vertex-index lists, in sorted order",
                "value": self.lattice.facet_checksum(),
            },
            "recipe": self.recipe.label(),
        }


# -- invariant checks -------------------------------------------------------------


def invariant_checks(L: FaceLattice) -> dict[str, bool]:
    d = L.dim
    degs = L.graph.degrees
    return {
        "euler": euler_characteristic(L) == 1 - (-1) ** d,
        "degree-min": min(degs) >= d,
        "balinski": vertex_connectivity_at_least(L.graph, d),
        # the rigidity inequality is a statement about d >= 3
        "kalai": d < 3 or kalai_check(L)[0],
    }


def certify(r: Recipe, target: Optional[tuple] = None) -> CertifiedWitness:
    """Execute a recipe, rebuild its lattice and check everything.

    Raises LawViolation when a law-backed prediction (or a count recorded by
    the planner) disagrees with the recount, CertificationFailed when an
    invariant fails or the pair misses ``target``, and ConstructionError when
    the geometry cannot be realized.
    """
    pred = predict(r)
    P = C.execute(r)
    try:
        L = lattice_of(P)
    except LatticeError as e:
        raise CertificationFailed(f"lattice check failed: {e}") from None
    got = fpair(L)
    if not pred.recount_required and pred.fpair != got:
        raise LawViolation(f"law violation: predicted {pred.fpair.as_tuple()}, recomputed {got.as_tuple()}")
    if pred.recount_required and r.expected is not None and tuple(r.expected) != got.as_tuple():
        raise LawViolation(f"law violation: expected {tuple(r.expected)}, recomputed {got.as_tuple()}")
    checks = invariant_checks(L)
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        raise CertificationFailed(f"invariant checks failed: {', '.join(failed)}")
    if target is not None and got.as_tuple() != tuple(target):
        raise CertificationFailed(f"recipe produces {got.as_tuple()}, not {tuple(target)}")
    return CertifiedWitness(r, P, L, got, list(checks), kalai_check(L)[1])


# -- stock for seeds and sums ---------------------------------------------------------


def _partitions(d: int, parts_min: int = 2):
    """Partitions of d into >= parts_min parts, each >= 1, nonincreasing order reversed."""
    out = []

    def rec(rem, maxp, acc):
        if rem == 0:
            if len(acc) >= parts_min:
                out.append(tuple(sorted(acc)))
            return
        for p in range(min(rem, maxp), 0, -1):
            rec(rem - p, p, acc + [p])

    rec(d, d, [])
    return sorted(set(out), key=lambda t: (len(t), t))


def _low_stock(k: int, f0_max: int) -> list[Recipe]:
    """Small k-dimensional polytopes used as join factors."""
    if k == 0:
        return [recipe(C.simplex(0))]
    if k == 1:
        return [recipe(C.simplex(1))]
    if k == 2:
        return [recipe(C.cyclic(n, 2)) for n in range(3, max(3, f0_max) + 1)]
    out = [recipe(C.simplex(k))]
    out += [recipe(C.product(*p)) for p in _partitions(k)]
    out += [recipe(C.cyclic(n, k)) for n in range(k + 2, f0_max + 1)]
    return out


def _f0(r: Recipe) -> int:
    return predict(r).state.pair[0]


def seeds(d: int, T0: int) -> list[Recipe]:
    out = [recipe(C.simplex(d))]
    out += [recipe(C.product(*p)) for p in _partitions(d)]
    out += [recipe(C.cyclic(n, d)) for n in range(d + 2, T0 + 1)]
    # joins of low-dimensional stock, with the lower-dimensional factor first
    for a in range(1, (d - 1) // 2 + 1):
        b = d - 1 - a
        for A in _low_stock(a, T0):
            for B in _low_stock(b, T0):
                if a == b and A.label() > B.label():
                    continue
                if _f0(A) + _f0(B) <= T0:
                    out.append(recipe(C.join(A, B)))
    return [r for r in out if _f0(r) <= T0]


@lru_cache(maxsize=None)
def primal_stock(d: int, T0: int) -> tuple:
    """Simplicial summands for connected sums along simplex facets."""
    out = [recipe(C.cyclic(n, d)) for n in range(d + 2, T0 + 1)]
    out += [recipe(C.product(*p), step("polar_dual")) for p in _partitions(d) if p != (1,) * d or d <= 4]
    return tuple(((step("connected_sum", other=r),), predict(r).state) for r in out if _f0(r) - d <= T0)


@lru_cache(maxsize=None)
def vertex_stock(d: int, T0: int) -> tuple:
    """Simple summands for sums at simple vertices (sums of the duals); the
    recipes returned are already dualized, i.e. simplicial."""
    out = [recipe(C.product(*p)) for p in _partitions(d)]
    out += [recipe(C.cyclic(n, d), step("polar_dual")) for n in range(d + 2, T0 + 1)]
    out = [r.then(step("polar_dual")) for r in out if _f0(r) - 2 <= T0]
    return tuple(
        ((step("polar_dual"), step("connected_sum", other=r), step("polar_dual")), predict(r).state) for r in out
    )


# -- law-driven closure ------------------------------------------------------------------


def _allowed(flag) -> bool:
    return flag is not False


def _fits(v0, v1, F, R, T0, T1) -> bool:
    if v0 <= T0 and v1 <= T1:
        return True
    return F is not None and F <= T0 and R <= T1


def _moves(st: AbstractState, d: int, T0: int, T1: int):
    """(steps, new_state) pairs in search order: truncations and facet pyramids
    first, then sums.  Sums that overshoot the bounds are skipped before their
    laws are evaluated."""
    if _allowed(st.has_simplex_facet):
        yield _ONE["pyramid_over_facet"], C.law_pyramid_over_simplex_facet(st)
    if _allowed(st.has_simple_vertex):
        yield _ONE["truncate_simple_vertex"], C.law_truncate_simple_vertex(st)
    if _allowed(st.has_simple_edge):
        yield _ONE["truncate_simple_edge"], C.law_truncate_simple_edge(st)
    a0, a1 = st.pair
    fv = st.fvector
    aF, aR = (fv[-1], fv[-2]) if fv is not None else (None, None)
    c2 = comb(d, 2)
    if _allowed(st.has_simplex_facet):
        for steps, b in primal_stock(d, T0):
            bf = b.fvector
            F = aF + bf[-1] - 2 if aF is not None else None
            R = aR + bf[-2] - d if aR is not None else None
            if _fits(a0 + b.pair[0] - d, a1 + b.pair[1] - c2, F, R, T0, T1):
                yield steps, C.law_connected_sum(st, b)
    if _allowed(st.has_simple_vertex) and fv is not None:
        dual = None
        for steps, b in vertex_stock(d, T0):
            bf = b.fvector
            v0, v1 = a0 + bf[-1] - 2, a1 + bf[-2] - d
            if _fits(v0, v1, aF + b.pair[0] - d, aR + b.pair[1] - c2, T0, T1):
                if dual is None:
                    dual = C.law_polar_dual(st)
                yield steps, C.law_polar_dual(C.law_connected_sum(dual, b))


_ONE = {op: (step(op),) for op in ("pyramid_over_facet", "truncate_simple_vertex", "truncate_simple_edge")}


def _within(st: AbstractState, T0: int, T1: int) -> bool:
    if st.pair is None:
        return False
    if st.pair[0] <= T0 and st.pair[1] <= T1:
        return True
    fv = st.fvector
    return fv is not None and fv[-1] <= T0 and fv[-2] <= T1


@dataclass
class _Node:
    recipe: Recipe
    state: AbstractState
    moves: int


@lru_cache(maxsize=256)
def closure(d: int, T0: int, T1: int, budget: Budget = DEFAULT_BUDGET) -> tuple:
    """All abstract states reachable within the bounds, in discovery order."""
    found: dict = {}
    order: list[_Node] = []

    def add(r: Recipe, st: AbstractState, moves: int) -> bool:
        if not _within(st, T0, T1):
            return False
        k = st.key()
        if k in found:
            return False
        node = _Node(r, st, moves)
        found[k] = node
        order.append(node)
        return True

    base: list[tuple] = []
    if d == 2:
        for n in range(3, T0 + 1):
            r = recipe(C.cyclic(n, 2))
            base.append((r, seed_state(r.seed), 0))
    else:
        for r in seeds(d, T0)[: budget.max_seeds]:
            base.append((r, predict(r).state, 0))
        if d - 1 >= 2:
            sub = closure(d - 1, T0 - 1, max(T1 - d, 0), budget)
            for node in sub[: budget.max_lifted]:
                st = C.law_pyramid(node.state)
                base.append((node.recipe.then(step("pyramid")), st, node.moves + 1))
    frontier = []
    for r, st, m in base:
        if add(r, st, m):
            frontier.append(found[st.key()])
    if d == 2:
        return tuple(order)
    depth = 0
    while frontier and depth < budget.max_length:
        nxt = []
        for node in frontier:
            if node.moves >= budget.max_length:
                continue
            for steps, st in _moves(node.state, d, T0, T1):
                try:
                    r = node.recipe.then(*steps)
                except RecipeInvalid:
                    continue
                if add(r, st, node.moves + 1):
                    nxt.append(found[st.key()])
        frontier = nxt
        depth += 1
    return tuple(order)


def _law_candidates(d: int, f0: int, f1: int, budget: Budget) -> list[Recipe]:
    nodes = closure(d, f0, f1, budget)
    direct = []
    for i, n in enumerate(nodes):
        st = n.state
        if st.pair == (f0, f1):
            direct.append((len(n.recipe.steps), i, n.recipe))
        elif st.fvector is not None and (st.fvector[-1], st.fvector[-2]) == (f0, f1):
            direct.append((len(n.recipe.steps) + 1, i, n.recipe.then(step("polar_dual"))))
    direct.sort(key=lambda t: (t[0], t[1]))
    return [r for _, _, r in direct]


def _stack_candidates(d: int, f0: int, f1: int, budget: Budget) -> Iterator[Recipe]:
    """Execute bases one vertex short of the target and count placements of a
    new point on the actual lattice: plain stacking first, then deeper points
    along each face ray.  Deep points can swallow vertices, so deep probes
    also try bases with more vertices."""
    nodes = closure(d, f0 + 1, f1 + d, budget)
    bases = [n for n in nodes if n.state.pair[0] == f0 - 1 and n.state.pair[1] < f1]
    bases.sort(key=lambda n: (-n.state.pair[1], len(n.recipe.steps)))
    bases = bases[: budget.max_probes]
    done = []

    def hit(n, k, j, depth):
        r = n.recipe.then(step("stack_over_face", (k, j, depth)))
        return Recipe(r.dim, r.seed, r.steps, (f0, f1))

    for n in bases:
        L = _base_lattice(n.recipe)
        if L is None:
            continue
        done.append((n, L))
        for k in range(1, d):
            for j, face in enumerate(C.faces_for_stacking(L, k)):
                if C.stack_effect(L, face) == (f0, f1):
                    yield hit(n, k, j, 0)
    deep = [n for n in nodes if f0 - 1 <= n.state.pair[0] <= f0 + 1]
    deep.sort(key=lambda n: (abs(n.state.pair[0] - f0 + 1), -n.state.pair[1], len(n.recipe.steps)))
    for n in deep[: budget.max_probes]:
        L = _base_lattice(n.recipe)
        if L is None:
            continue
        P = C.execute(n.recipe)
        for k in range(1, d):
            for j, face in enumerate(C.faces_for_stacking(L, k)):
                stops = C.ray_stops(P, C.mask_of(face))
                for depth in range(1, len(stops)):
                    if C.placement_effect(L, stops[depth][1]) == (f0, f1):
                        yield hit(n, k, j, depth)


def _truncation_candidates(d: int, f0: int, f1: int, budget: Budget) -> Iterator[Recipe]:
    """Placements in the polar dual, read back through a second dual: the
    primal picture is cutting the base with a hyperplane near one of its faces."""
    nodes = closure(d, f0 + 1, f1 + d, budget)
    bases = [n for n in nodes if n.state.pair[0] <= f0 + 1 and n.state.pair[1] <= f1]
    bases.sort(key=lambda n: (abs(f0 - 1 - n.state.pair[0]), -n.state.pair[1], len(n.recipe.steps)))
    for depth_pass in (0, 1):
        for n in bases[: budget.max_probes]:
            base = n.recipe.then(step("polar_dual"))
            L = _base_lattice(base)
            if L is None:
                continue
            D = C.execute(base)
            for k in range(1, d):
                for j, face in enumerate(C.faces_for_stacking(L, k)):
                    stops = C.ray_stops(D, C.mask_of(face))
                    depths = [0] if depth_pass == 0 else range(1, len(stops))
                    for depth in depths:
                        fv = C.placement_fvector(L, stops[depth][1], (d - 2, d - 1))
                        if (fv[d - 1], fv[d - 2]) == (f0, f1):
                            r = base.then(step("stack_over_face", (k, j, depth)), step("polar_dual"))
                            yield Recipe(r.dim, r.seed, r.steps, (f0, f1))


def _base_lattice(r: Recipe):
    try:
        return lattice_of(C.execute(r))
    except (ConstructionError, RecipeInvalid, LatticeError):
        return None


def candidates(d: int, f0: int, f1: int, budget: Budget = DEFAULT_BUDGET) -> Iterator[Recipe]:
    """Recipes whose predicted pair is (f0, f1), in search order."""
    yield from _law_candidates(d, f0, f1, budget)
    yield from _stack_candidates(d, f0, f1, budget)
    yield from _truncation_candidates(d, f0, f1, budget)
    if d >= 4 and f0 - 1 > d - 1:
        b0, b1 = f0 - 1, f1 - (f0 - 1)
        if b1 > 0 and feasible(d - 1, b0, b1).admits:
            for sub in candidates(d - 1, b0, b1, budget):
                r = sub.then(step("pyramid"))
                if sub.expected is not None:
                    r = Recipe(r.dim, r.seed, r.steps, (f0, f1))
                yield r


def plan(d: int, f0: int, f1: int, budget: Budget = DEFAULT_BUDGET):
    """First recipe predicted to hit (f0, f1), or NoPlanFound."""
    for r in candidates(d, f0, f1, budget):
        return r
    return _no_plan(d, f0, f1, budget)


def _no_plan(d, f0, f1, budget) -> NoPlanFound:
    nodes = closure(d, f0, f1, budget)
    same_f0 = sorted({n.state.pair[1] for n in nodes if n.state.pair[0] == f0})
    return NoPlanFound(d, f0, f1, {
        "states_explored": len(nodes),
        "edge_counts_reached_at_this_f0": same_f0,
        "budget": vars(budget) if hasattr(budget, "__dict__") else str(budget),
    })


def construct(d: int, f0: int, f1: int, budget: Budget = DEFAULT_BUDGET):
    """Plan and certify; tries candidates in order until one certifies.

    Returns a CertifiedWitness or NoPlanFound.  A LawViolation is never
    swallowed.
    """
    tried = 0
    errors = []
    for r in candidates(d, f0, f1, budget):
        if tried >= budget.max_certify:
            break
        tried += 1
        try:
            return certify(r, (f0, f1))
        except (ConstructionError, CertificationFailed) as e:
            errors.append(f"{r.label()}: {e}")
    out = _no_plan(d, f0, f1, budget)
    out.frontier["candidates_tried"] = tried
    if errors:
        out.frontier["failures"] = errors
    return out


# -- tables ----------------------------------------------------------------------------


def band(d: int, f0: int) -> range:
    if d == 3:
        return range(ceil(3 * f0 / 2), 3 * f0 - 6 + 1)
    return range(ceil(d * f0 / 2), comb(f0, 2) + 1)


@dataclass
class TableRow:
    f0: int
    f1: int
    verdict: object
    witness: Optional[str] = None  # certified / planned-uncertified / no-plan-found
    recipe: Optional[str] = None

    def to_json(self) -> dict:
        out = {"f0": self.f0, "f1": self.f1, "status": self.verdict.status,
               "rules": [r.rule for r in self.verdict.reasons]}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.recipe is not None:
            out["recipe"] = self.recipe
        return out


def table(d: int, f0_max: int, certify_witnesses: bool = False, plan_witnesses: bool = False,
          budget: Budget = DEFAULT_BUDGET) -> list[TableRow]:
    """Verdicts for the band (plus any listed exception outside it)."""
    if not 3 <= d <= 7:
        raise ValueError("table supports d = 3..7")
    pairs = set()
    for n in range(d + 1, f0_max + 1):
        pairs.update((n, m) for m in band(d, n))
    pairs |= listed_exceptions(d, f0_max)
    rows = []
    for n, m in sorted(pairs):
        v = feasible(d, n, m)
        row = TableRow(n, m, v)
        if v.admits and (certify_witnesses or plan_witnesses):
            if certify_witnesses:
                w = construct(d, n, m, budget)
                if isinstance(w, CertifiedWitness):
                    row.witness, row.recipe = "certified", w.recipe.label()
                else:
                    p = plan(d, n, m, budget)
                    row.witness = "planned-uncertified" if p else "no-plan-found"
                    row.recipe = p.label() if p else None
            else:
                p = plan(d, n, m, budget)
                row.witness = "planned-uncertified" if p else "no-plan-found"
                row.recipe = p.label() if p else None
        rows.append(row)
    return rows


# -- bundles ---------------------------------------------------------------------------


def write_bundle(w: CertifiedWitness, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    files = {
        "witness.json": w.polytope.dumps(),
        "recipe.json": w.recipe.dumps(),
        "certificate.json": json.dumps(w.certificate(), indent=1, sort_keys=True) + "\n",
    }
    paths = []
    for name, text in files.items():
        path = os.path.join(out_dir, name)
        with open(path, "w") as fh:
            fh.write(text)
        paths.append(path)
    return paths
