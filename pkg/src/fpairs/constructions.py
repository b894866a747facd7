"""Generators, operators and recipes.

Every operator works on coordinates and returns a new VPolytope whose
coordinates have been rescaled to coprime integers.  Next to each operator
sits its transition law on f-vectors and on a handful of tri-state
predicates (``AbstractState``), which is what the planner searches with.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Optional

from .geometry import (
    VPolytope,
    _hull,
    centroid,
    dot,
    facet_enumeration,
    invert,
    normalize_points,
)
from .lattice import (
    FaceLattice,
    FPair,
    build_face_lattice,
    indices_of,
    mask_of,
    polar_dual,
    simple_edges,
    simple_vertices,
)

MAX_HALVINGS = 64


class ConstructionError(RuntimeError):
    """Geometric placement failed; the recipe may work with a deeper search."""


class PreconditionError(ConstructionError):
    """The selector found nothing to act on (no simple vertex, ...)."""


class RecipeInvalid(ValueError):
    pass


# -- observers ----------------------------------------------------------------
# Test suites hook in here to run invariant checks on everything that gets built.

_observers: list[Callable[[VPolytope], None]] = []


def add_observer(fn: Callable[[VPolytope], None]):
    _observers.append(fn)


def remove_observer(fn):
    if fn in _observers:
        _observers.remove(fn)


def _emit(P: VPolytope) -> VPolytope:
    for fn in _observers:
        fn(P)
    return P


def _finish(points, dim) -> VPolytope:
    return _emit(VPolytope(dim, normalize_points(points)))


@lru_cache(maxsize=4096)
def lattice_of(P: VPolytope) -> FaceLattice:
    return build_face_lattice(P)


# -- generators ---------------------------------------------------------------


def _simplex_points(d: int):
    return [tuple(Fraction(0) for _ in range(d))] + [
        tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)
    ]


def _check_dim(d: int, lo: int = 3):
    if not lo <= d <= 7:
        raise ValueError(f"dimension {d} out of range")


def gen_simplex(d: int, *, low_ok: bool = False) -> VPolytope:
    """Origin plus the standard basis."""
    _check_dim(d, 0 if low_ok else 3)
    return _finish(_simplex_points(d), d)


def gen_cyclic(n: int, d: int, params=None, *, low_ok: bool = False) -> VPolytope:
    """n points on the moment curve at t = 0, 1, ..., n-1 (or at ``params``)."""
    _check_dim(d, 2 if low_ok else 3)
    if n < d + 1:
        raise ValueError("cyclic polytope needs n >= d+1")
    if params is None:
        params = range(n)
    params = [Fraction(t) for t in params]
    if len(set(params)) != len(params) or len(params) != n:
        raise ValueError("parameter collision")
    return _finish([tuple(t**k for k in range(1, d + 1)) for t in params], d)


def gen_simplex_product(dims) -> VPolytope:
    dims = list(dims)
    if not dims or any(a < 1 for a in dims):
        raise ValueError("simplex product factors must have dimension >= 1")
    d = sum(dims)
    if d > 7:
        raise ValueError("dimension overflow")
    pts = [sum(combo, ()) for combo in itertools.product(*(_simplex_points(a) for a in dims))]
    return _finish(pts, d)


def gen_cube(d: int) -> VPolytope:
    _check_dim(d)
    return _finish(list(itertools.product([Fraction(0), Fraction(1)], repeat=d)), d)


def gen_join(A: VPolytope, B: VPolytope) -> VPolytope:
    """A in the plane last coordinate 0, B shifted into a skew subspace at height 1."""
    d = A.dim + B.dim + 1
    if d > 7:
        raise ValueError("dimension overflow")
    za = (Fraction(0),) * A.dim
    zb = (Fraction(0),) * B.dim
    pts = [tuple(x) + zb + (Fraction(0),) for x in A.vertices]
    pts += [za + tuple(y) + (Fraction(1),) for y in B.vertices]
    return _finish(pts, d)


# -- operators ----------------------------------------------------------------


def op_pyramid(P: VPolytope) -> VPolytope:
    if P.dim + 1 > 7:
        raise ValueError("dimension overflow")
    pts = [tuple(v) + (Fraction(0),) for v in P.vertices]
    pts.append(tuple(centroid(P.vertices)) + (Fraction(1),))
    return _finish(pts, P.dim + 1)


def _select_facet(P: VPolytope, select) -> int:
    facets = facet_enumeration(P)
    if select == "first_simplex":
        for i, f in enumerate(facets):
            if len(f.incident) == P.dim:
                return i
        raise PreconditionError("no simplex facet")
    if select == "first":
        return 0
    raise RecipeInvalid(f"unknown facet selector {select!r}")


def _place_beyond(P: VPolytope, face_mask: int):
    """A point beyond exactly the facets containing the face, beneath the rest.

    Start at the face centroid pushed out away from the vertex centroid and
    halve the push until the point sees the right facets.
    """
    facets = facet_enumeration(P)
    ineqs = [f.inequality() for f in facets]
    beyond = [mask_of(f.incident) & face_mask == face_mask for f in facets]
    g = centroid([P.vertices[i] for i in indices_of(face_mask)])
    o = centroid(P.vertices)
    s = Fraction(1)
    for _ in range(MAX_HALVINGS):
        p = tuple(gi + s * (gi - oi) for gi, oi in zip(g, o))
        ok = True
        for (a, b), out in zip(ineqs, beyond):
            v = dot(a, p)
            if (v <= b) if out else (v >= b):
                ok = False
                break
        if ok:
            return p
        s /= 2
    raise ConstructionError("apex placement failed")


def op_pyramid_over_facet(P: VPolytope, select="first_simplex") -> VPolytope:
    i = _select_facet(P, select)
    F = facet_enumeration(P)[i]
    p = _place_beyond(P, mask_of(F.incident))
    return _finish(list(P.vertices) + [p], P.dim)


def faces_for_stacking(L: FaceLattice, k: int) -> list[tuple]:
    """k-faces in canonical (sorted index tuple) order."""
    return sorted(indices_of(m) for m in L.masks[k])


def ray_stops(P: VPolytope, face_mask: int) -> list[tuple]:
    """Placements along the ray from the vertex centroid through a face centroid.

    Past the face, the ray leaves the facet halfspaces one hyperplane at a
    time.  Returns one (s, visible) pair per gap between consecutive
    crossings: the point is g + s(g - o), and ``visible`` flags, per facet in
    canonical order, whether the point is beyond it.  Depth 0 sees exactly the
    facets through the face.
    """
    facets = facet_enumeration(P)
    idx = indices_of(face_mask)
    g = centroid([P.vertices[i] for i in idx])
    o = centroid(P.vertices)
    u = tuple(gi - oi for gi, oi in zip(g, o))
    # crossing parameter per facet; None = never crossed, 0 = through the face
    cross = []
    for f in facets:
        a, b = f.inequality()
        if mask_of(f.incident) & face_mask == face_mask:
            cross.append(Fraction(0))
            continue
        slope = dot(a, u)
        cross.append((b - dot(a, g)) / slope if slope > 0 else None)
    stops = sorted({c for c in cross if c is not None and c > 0})
    out = []
    lo = Fraction(0)
    for c in stops + [None]:
        s = (lo + c) / 2 if c is not None else lo + 1
        out.append((s, tuple(x is not None and x < s for x in cross)))
        lo = c
    return out


def ray_point(P: VPolytope, face_mask: int, s) -> tuple:
    g = centroid([P.vertices[i] for i in indices_of(face_mask)])
    o = centroid(P.vertices)
    return tuple(gi + s * (gi - oi) for gi, oi in zip(g, o))


def op_stack_over_face(P: VPolytope, dim: int, index: int, depth: int = 0) -> VPolytope:
    """Add a point on the ray through the chosen face's centroid.

    The face is the ``index``-th ``dim``-face in canonical order (dim >= 1:
    stacking beyond a vertex would swallow it).  At depth 0 the point is
    beyond exactly the facets through the face; each further depth crosses
    one more facet hyperplane (or several that the ray meets together).
    """
    L = lattice_of(P)
    if not 1 <= dim <= P.dim - 1:
        raise RecipeInvalid("stacking face must have dimension 1..d-1")
    faces = faces_for_stacking(L, dim)
    if not 0 <= index < len(faces):
        raise PreconditionError("no such face")
    m = mask_of(faces[index])
    stops = ray_stops(P, m)
    if not 0 <= depth < len(stops):
        raise PreconditionError("ray has no such depth")
    s, visible = stops[depth]
    # deep placements can swallow vertices: keep those on some hidden facet
    hidden = 0
    for f, v in zip(facet_enumeration(P), visible):
        if not v:
            hidden |= mask_of(f.incident)
    kept = [x for i, x in enumerate(P.vertices) if hidden >> i & 1]
    return _finish(kept + [ray_point(P, m, s)], P.dim)


@lru_cache(maxsize=64)
def _facet_incidence(L: FaceLattice) -> tuple:
    """Per dimension, each face's set of facets (canonical facet order) as a bitmask."""
    fmasks = sorted(L.masks[L.dim - 1], key=indices_of)
    out = []
    for level in L.masks:
        row = []
        for m in level:
            inc = 0
            for j, F in enumerate(fmasks):
                if F & m == m:
                    inc |= 1 << j
            row.append(inc)
        out.append(tuple(row))
    return tuple(out)


def placement_fvector(L: FaceLattice, visible, dims=None) -> dict[int, int]:
    """f_k after adding a point in general position that is beyond the facets
    flagged in ``visible`` (canonical facet order) and beneath the rest.

    Beneath-beyond: a k-face survives when some hidden facet contains it, and
    each (k-1)-face lying on both a visible and a hidden facet (the horizon)
    spans a new k-face with the point.  Returns {k: f_k} for the requested
    dimensions (all by default).
    """
    inc = _facet_incidence(L)
    vis = 0
    for j, v in enumerate(visible):
        if v:
            vis |= 1 << j
    hid = ((1 << len(visible)) - 1) & ~vis
    if dims is None:
        dims = range(L.dim)
    out = {}
    for k in dims:
        kept = sum(1 for x in inc[k] if x & hid)
        new = 1 if k == 0 else sum(1 for x in inc[k - 1] if x & hid and x & vis)
        out[k] = kept + new
    return out


def placement_effect(L: FaceLattice, visible) -> tuple[int, int]:
    """(f0, f1) after a general-position placement; see placement_fvector."""
    fv = placement_fvector(L, visible, (0, 1))
    return fv[0], fv[1]


def stack_effect(L: FaceLattice, face: tuple) -> tuple[int, int]:
    """(f0, f1) after stacking beyond exactly the facets containing ``face``.

    Here nothing dies, every vertex of the star is on the horizon, and an old
    edge loses all its facets only when the face is that edge (every face is
    the intersection of the facets through it).
    """
    m = mask_of(face)
    seen = 0
    for F in L.masks[L.dim - 1]:
        if F & m == m:
            seen |= F
    lost = 1 if len(face) == 2 and m in L.masks[1] else 0
    return L.nvertices + 1, len(L.masks[1]) + seen.bit_count() - lost


def op_truncate_simple_vertex(P: VPolytope, select="lowest") -> VPolytope:
    """Cut off the lowest-index simple vertex through the midpoints of its edges.

    Every other vertex sits strictly past the hyperplane through the
    neighbours (otherwise it would lie in the simplex spanned by the vertex
    and its neighbours), so the midpoints always give a clean cut.
    """
    if select != "lowest":
        raise RecipeInvalid(f"unknown vertex selector {select!r}")
    L = lattice_of(P)
    sv = sorted(simple_vertices(L))
    if not sv:
        raise PreconditionError("no simple vertex")
    v = sv[0]
    x = P.vertices[v]
    nbrs = sorted(L.graph.adjacency[v])
    new = [tuple((a + b) / 2 for a, b in zip(x, P.vertices[w])) for w in nbrs]
    pts = [p for i, p in enumerate(P.vertices) if i != v] + new
    return _finish(pts, P.dim)


def op_truncate_simple_edge(P: VPolytope, select="first") -> VPolytope:
    """Cut off the first simple edge (canonical order).

    The cutting functional is the sum of the outer normals of the d-1
    facets through the edge; the level is halfway between the edge and the
    next-highest vertex, so the cut separates exactly the two endpoints.
    """
    if select != "first":
        raise RecipeInvalid(f"unknown edge selector {select!r}")
    L = lattice_of(P)
    se = sorted(simple_edges(L))
    if not se:
        raise PreconditionError("no simple edge")
    u, v = se[0]
    em = mask_of((u, v))
    c = [Fraction(0)] * P.dim
    for f in facet_enumeration(P):
        if mask_of(f.incident) & em == em:
            a, _ = f.inequality()
            c = [x + y for x, y in zip(c, a)]
    top = dot(c, P.vertices[u])
    rest = max(dot(c, x) for i, x in enumerate(P.vertices) if i not in (u, v))
    beta = (top + rest) / 2
    adj = L.graph.adjacency
    new = []
    for a, other in ((u, v), (v, u)):
        xa = P.vertices[a]
        for w in sorted(adj[a]):
            if w == other:
                continue
            xw = P.vertices[w]
            t = (top - beta) / (top - dot(c, xw))
            new.append(tuple(p + t * (q - p) for p, q in zip(xa, xw)))
    pts = [p for i, p in enumerate(P.vertices) if i not in (u, v)] + new
    return _finish(pts, P.dim)


def op_polar_dual(P: VPolytope) -> VPolytope:
    return _emit(polar_dual(P))


def _affine_map(src: list, dst: list):
    """The affine map sending src[i] -> dst[i] for d+1 affinely independent points."""
    p0, q0 = src[0], dst[0]
    n = len(p0)
    S = [[src[j + 1][i] - p0[i] for j in range(n)] for i in range(n)]
    T = [[dst[j + 1][i] - q0[i] for j in range(n)] for i in range(n)]
    Sinv = invert(S)
    M = [[sum(T[i][k] * Sinv[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    def f(x):
        y = [xi - pi for xi, pi in zip(x, p0)]
        return tuple(q0[i] + sum(M[i][j] * y[j] for j in range(n)) for i in range(n))

    return f


def op_connected_sum(A: VPolytope, B: VPolytope, select="first_simplex") -> VPolytope:
    """Glue A and B along simplex facets Fa, Fb.

    B is first sent by a projective map (fixing the hyperplane of Fb) into the
    half-cylinder over Fb, then squashed toward Fb and mapped affinely onto
    the far side of Fa.  Squashing halves until the hull has the expected
    counts: f0(A)+f0(B)-d vertices, f1(A)+f1(B)-C(d,2) edges, and
    F(A)+F(B)-2 facets.
    """
    d = A.dim
    if B.dim != d:
        raise ValueError("summands must have the same dimension")
    ia = _select_facet(A, select)
    ib = _select_facet(B, select)
    Fa = facet_enumeration(A)[ia]
    Fb = facet_enumeration(B)[ib]
    na, ca = Fa.inequality()
    nb, cb = Fb.inequality()

    # projective map sending a point z just beyond Fb to infinity in direction -nb
    z = _place_beyond(B, mask_of(Fb.incident))

    def t(x):
        return cb - dot(nb, x)

    zeta = -t(z)
    # with O = z - nb the image of B stays on its own side of Fb
    O = tuple(zi - ni for zi, ni in zip(z, nb))

    def proj(x):
        tx = t(x) / zeta
        return tuple((xi + tx * oi) / (1 + tx) for xi, oi in zip(x, O))

    B1 = [proj(x) for x in B.vertices]
    nn = dot(nb, nb)

    ga = centroid([A.vertices[i] for i in Fa.incident])
    gb = centroid([B.vertices[i] for i in Fb.incident])
    src = [B.vertices[i] for i in Fb.incident] + [tuple(g - n for g, n in zip(gb, nb))]
    dst = [A.vertices[i] for i in Fa.incident] + [tuple(g + n for g, n in zip(ga, na))]
    amap = _affine_map(src, dst)

    LA, LB = lattice_of(A), lattice_of(B)
    want_f0 = A.nvertices + B.nvertices - d
    want_f1 = LA.fvector[1] + LB.fvector[1] - comb(d, 2)
    want_F = LA.fvector[-1] + LB.fvector[-1] - 2
    rest = [i for i in range(B.nvertices) if i not in Fb.incident]
    lam = Fraction(1, 2)
    for _ in range(MAX_HALVINGS):
        pts = list(A.vertices)
        for i in rest:
            x = B1[i]
            s = (1 - lam) * t(x) / nn
            pts.append(amap(tuple(xi + s * ni for xi, ni in zip(x, nb))))
        pts = normalize_points(pts)
        h = _hull(tuple(pts), d)
        if all(h.vertex_ok) and len(pts) == want_f0 and len(h.facets) == want_F:
            Q = VPolytope(d, pts)
            if lattice_of(Q).fvector[1] == want_f1:
                return _emit(Q)
        lam /= 2
    raise ConstructionError("connected sum failed: convex position not achieved")


# -- recipes ------------------------------------------------------------------


@dataclass(frozen=True)
class Generator:
    kind: str
    dim: int
    params: tuple = ()  # cyclic: (n,), simplex_product: dims, join: (RecipeA, RecipeB)

    def to_json(self) -> dict:
        if self.kind == "simplex" or self.kind == "cube":
            return {"kind": self.kind, "dim": self.dim}
        if self.kind == "cyclic":
            return {"kind": "cyclic", "n": self.params[0], "dim": self.dim}
        if self.kind == "simplex_product":
            return {"kind": "simplex_product", "dims": list(self.params)}
        if self.kind == "join":
            return {"kind": "join", "parts": [r.to_json() for r in self.params]}
        raise RecipeInvalid(f"unknown generator {self.kind!r}")

    @staticmethod
    def from_json(obj: dict) -> "Generator":
        kind = obj.get("kind")
        if kind in ("simplex", "cube"):
            return Generator(kind, int(obj["dim"]))
        if kind == "cyclic":
            return Generator(kind, int(obj["dim"]), (int(obj["n"]),))
        if kind == "simplex_product":
            dims = tuple(int(a) for a in obj["dims"])
            return Generator(kind, sum(dims), dims)
        if kind == "join":
            parts = tuple(Recipe.from_json(p) for p in obj["parts"])
            if len(parts) != 2:
                raise RecipeInvalid("join takes two parts")
            return Generator(kind, parts[0].dim + parts[1].dim + 1, parts)
        raise RecipeInvalid(f"unknown generator {kind!r}")

    def label(self) -> str:
        if self.kind == "simplex":
            return f"simplex({self.dim})"
        if self.kind == "cube":
            return f"cube({self.dim})"
        if self.kind == "cyclic":
            return f"cyclic({self.params[0]},{self.dim})"
        if self.kind == "simplex_product":
            return "Delta_{" + ",".join(map(str, self.params)) + "}"
        return f"join({self.params[0].label()}, {self.params[1].label()})"


def simplex(d):
    return Generator("simplex", d)


def cyclic(n, d):
    return Generator("cyclic", d, (n,))


def product(*dims):
    return Generator("simplex_product", sum(dims), tuple(dims))


def cube(d):
    return Generator("cube", d)


def join(a: "Recipe", b: "Recipe"):
    return Generator("join", a.dim + b.dim + 1, (a, b))


OPS = (
    "pyramid",
    "pyramid_over_facet",
    "stack_over_face",
    "truncate_simple_vertex",
    "truncate_simple_edge",
    "connected_sum",
    "polar_dual",
)


@dataclass(frozen=True)
class OpStep:
    op: str
    select: object = None  # selector rule; (dim, index, depth) for stack_over_face
    other: Optional["Recipe"] = None

    def to_json(self) -> dict:
        out: dict = {"op": self.op}
        if self.op == "stack_over_face":
            out["select"] = {"dim": self.select[0], "index": self.select[1], "depth": self.select[2]}
        elif self.select is not None:
            out["select"] = self.select
        if self.other is not None:
            out["other"] = self.other.to_json()
        return out

    @staticmethod
    def from_json(obj: dict) -> "OpStep":
        op = obj.get("op")
        if op not in OPS:
            raise RecipeInvalid(f"unknown op {op!r}")
        sel = obj.get("select")
        if op == "stack_over_face":
            if not isinstance(sel, dict):
                raise RecipeInvalid("stack_over_face needs a {dim, index, depth} selector")
            sel = (int(sel["dim"]), int(sel["index"]), int(sel.get("depth", 0)))
        other = obj.get("other")
        if op == "connected_sum":
            if other is None:
                raise RecipeInvalid("connected_sum needs 'other'")
            other = Recipe.from_json(other)
        else:
            other = None
        return OpStep(op, sel if sel is not None else DEFAULT_SELECT.get(op), other)

    def label(self) -> str:
        if self.op == "connected_sum":
            return f"connected_sum[{self.other.label()}]"
        if self.op == "stack_over_face":
            k, i, depth = self.select
            return f"stack_over_face[{k}-face #{i}" + (f", depth {depth}]" if depth else "]")
        return self.op


DEFAULT_SELECT = {
    "pyramid_over_facet": "first_simplex",
    "truncate_simple_vertex": "lowest",
    "truncate_simple_edge": "first",
    "connected_sum": "first_simplex",
}


def step(op: str, select=None, other=None) -> OpStep:
    if select is None:
        select = DEFAULT_SELECT.get(op)
    if op == "stack_over_face" and len(select) == 2:
        select = (*select, 0)
    return OpStep(op, tuple(select) if op == "stack_over_face" else select, other)


@dataclass(frozen=True)
class Recipe:
    dim: int
    seed: Generator
    steps: tuple = ()
    # expected pair when known by some route other than the laws (e.g. a
    # lattice count done by the planner for a stacking step)
    expected: Optional[tuple] = field(default=None, compare=False)

    def then(self, *steps: OpStep) -> "Recipe":
        d = self.dim
        for s in steps:
            if s.op == "pyramid":
                d += 1
        return Recipe(d, self.seed, self.steps + tuple(steps))

    def prefix(self) -> "Recipe":
        last = self.steps[-1]
        d = self.dim - (1 if last.op == "pyramid" else 0)
        return Recipe(d, self.seed, self.steps[:-1])

    def to_json(self) -> dict:
        out = {"dimension": self.dim, "seed": self.seed.to_json(), "steps": [s.to_json() for s in self.steps]}
        return out

    def dumps(self) -> str:
        obj = self.to_json()
        pred = predict_fpair(self)
        if pred.fpair is not None:
            obj["predicted"] = {"d": self.dim, "f0": pred.fpair.f0, "f1": pred.fpair.f1}
        elif self.expected is not None:
            obj["predicted"] = {"d": self.dim, "f0": self.expected[0], "f1": self.expected[1]}
        obj["recount_required"] = pred.recount_required
        return json.dumps(obj, indent=1, sort_keys=True) + "\n"

    @staticmethod
    def from_json(obj: dict) -> "Recipe":
        try:
            seed = Generator.from_json(obj["seed"])
            steps = tuple(OpStep.from_json(s) for s in obj.get("steps", []))
        except (KeyError, TypeError) as e:
            raise RecipeInvalid(f"malformed recipe: {e}") from None
        d = seed.dim + sum(1 for s in steps if s.op == "pyramid")
        if "dimension" in obj and int(obj["dimension"]) != d:
            raise RecipeInvalid("recipe dimension does not match its steps")
        exp = None
        if "predicted" in obj:
            p = obj["predicted"]
            exp = (int(p["f0"]), int(p["f1"]))
        return Recipe(d, seed, steps, exp)

    @staticmethod
    def loads(text: str) -> "Recipe":
        return Recipe.from_json(json.loads(text))

    def label(self) -> str:
        return " > ".join([self.seed.label()] + [s.label() for s in self.steps])


def recipe(seed: Generator, *steps: OpStep) -> Recipe:
    return Recipe(seed.dim, seed).then(*steps)


@lru_cache(maxsize=2048)
def _build_seed(g: Generator) -> VPolytope:
    if g.kind == "simplex":
        return gen_simplex(g.dim, low_ok=True)
    if g.kind == "cube":
        return gen_cube(g.dim)
    if g.kind == "cyclic":
        return gen_cyclic(g.params[0], g.dim, low_ok=True)
    if g.kind == "simplex_product":
        return gen_simplex_product(g.params)
    if g.kind == "join":
        return gen_join(execute(g.params[0]), execute(g.params[1]))
    raise RecipeInvalid(f"unknown generator {g.kind!r}")


def apply_step(P: VPolytope, s: OpStep) -> VPolytope:
    if s.op == "pyramid":
        return op_pyramid(P)
    if s.op == "pyramid_over_facet":
        return op_pyramid_over_facet(P, s.select)
    if s.op == "stack_over_face":
        return op_stack_over_face(P, *s.select)
    if s.op == "truncate_simple_vertex":
        return op_truncate_simple_vertex(P, s.select)
    if s.op == "truncate_simple_edge":
        return op_truncate_simple_edge(P, s.select)
    if s.op == "connected_sum":
        return op_connected_sum(P, execute(s.other), s.select)
    if s.op == "polar_dual":
        return op_polar_dual(P)
    raise RecipeInvalid(f"unknown op {s.op!r}")


@lru_cache(maxsize=4096)
def _execute(r: Recipe) -> VPolytope:
    if not r.steps:
        return _build_seed(r.seed)
    return apply_step(_execute(r.prefix()), r.steps[-1])


def execute(r: Recipe) -> VPolytope:
    """Run a recipe; identical recipes give identical coordinates."""
    return _execute(Recipe(r.dim, r.seed, r.steps))


def trace(r: Recipe) -> list[VPolytope]:
    """The seed and every intermediate polytope of a recipe, in order."""
    out = []
    for k in range(len(r.steps) + 1):
        d = r.seed.dim + sum(1 for s in r.steps[:k] if s.op == "pyramid")
        out.append(execute(Recipe(d, r.seed, r.steps[:k])))
    return out


# -- transition laws ------------------------------------------------------------

YES, NO, UNKNOWN = True, False, None


def _and(a, b):
    if a is NO or b is NO:
        return NO
    if a is YES and b is YES:
        return YES
    return UNKNOWN


def _or(a, b):
    if a is YES or b is YES:
        return YES
    if a is NO and b is NO:
        return NO
    return UNKNOWN


def _weaken(a):
    """'yes' becomes 'unknown', 'no' stays 'no'."""
    return NO if a is NO else UNKNOWN


@dataclass(frozen=True)
class AbstractState:
    """What the laws know about a polytope: its f-vector (or just its pair) and
    tri-state predicates (True / False / None = unknown)."""

    d: int
    fvector: Optional[tuple]  # full f-vector when tracked
    pair: Optional[tuple]  # (f0, f1) when known
    has_simple_vertex: Optional[bool] = UNKNOWN
    has_simplex_facet: Optional[bool] = UNKNOWN
    is_simplicial: Optional[bool] = UNKNOWN
    is_simple: Optional[bool] = UNKNOWN
    has_simple_edge: Optional[bool] = UNKNOWN

    @property
    def fpair(self) -> Optional[FPair]:
        if self.pair is None:
            return None
        return FPair(self.d, *self.pair)

    @property
    def is_simplex(self):
        if self.pair is None:
            return UNKNOWN
        return self.pair[0] == self.d + 1

    def key(self):
        return (self.d, self.fvector or self.pair, self.has_simple_vertex, self.has_simplex_facet,
                self.is_simplicial, self.is_simple, self.has_simple_edge)


def _state(d, fv, **preds) -> AbstractState:
    fv = tuple(fv) if fv is not None else None
    pair = None
    if fv is not None:
        # a segment counts itself as its one edge so the pyramid law stays uniform
        pair = (fv[0], fv[1] if d > 1 else 1)
    s = AbstractState(d, fv, pair, **preds)
    return _degree_rule(s)


def _degree_rule(s: AbstractState) -> AbstractState:
    # average degree below d+1 and every degree >= d: some vertex has degree d
    if s.pair is not None and s.d >= 1 and 2 * s.pair[1] < (s.d + 1) * s.pair[0]:
        s = replace(s, has_simple_vertex=YES)
    if s.pair is not None and 2 * s.pair[1] == s.d * s.pair[0]:
        s = replace(s, is_simple=YES, has_simple_vertex=YES)
    return s


def _simplex_fvector(d):
    return [comb(d + 1, k + 1) for k in range(d)]


def _cyclic_fvector(n, d):
    if d == 1:
        return [2]
    # simplicial: h_i = C(n-d-1+i, i) for i <= d/2, symmetric
    h = [comb(n - d - 1 + i, i) if i <= d // 2 else 0 for i in range(d + 1)]
    for i in range(d + 1):
        if i > d // 2:
            h[i] = h[d - i]
    return [sum(comb(d - i, k + 1 - i) * h[i] for i in range(k + 2)) for k in range(d)]


def _with_top(fv):
    """f_{-1} = 1 prepended and the polytope itself appended."""
    return [1] + list(fv) + [1]


def _product_fvector(dims):
    # faces are products of nonempty faces: multiply face polynomials
    poly = {0: 1}  # dim -> count, over nonempty faces including the whole
    for a in dims:
        fac = {k: comb(a + 1, k + 1) for k in range(a + 1)}
        new = {}
        for i, x in poly.items():
            for j, y in fac.items():
                new[i + j] = new.get(i + j, 0) + x * y
        poly = new
    d = sum(dims)
    return [poly[k] for k in range(d)]


def _join_fvector(fa, da, fb, db):
    A = _with_top(fa)  # index k+1 for k-faces, k = -1..da
    B = _with_top(fb)
    d = da + db + 1
    out = []
    for k in range(d):
        tot = 0
        for i in range(-1, da + 1):
            j = k - 1 - i
            if -1 <= j <= db:
                tot += A[i + 1] * B[j + 1]
        out.append(tot)
    return out


def seed_state(g: Generator) -> AbstractState:
    d = g.dim
    if g.kind == "simplex" or (g.kind == "cyclic" and g.params[0] == d + 1):
        fv = _simplex_fvector(d) if d > 0 else []
        if d == 0:
            return AbstractState(0, (), (1, 0), YES, YES, YES, YES, NO)
        return _state(d, fv, has_simple_vertex=YES, has_simplex_facet=YES, is_simplicial=YES,
                      is_simple=YES, has_simple_edge=YES)
    if g.kind == "cyclic":
        n = g.params[0]
        fv = _cyclic_fvector(n, d)
        if d == 2:
            return _state(d, fv, has_simple_vertex=YES, has_simplex_facet=YES, is_simplicial=YES,
                          is_simple=YES, has_simple_edge=YES)
        if d == 3:
            return _state(d, fv, has_simplex_facet=YES, is_simplicial=YES)
        # neighborly: every vertex has degree n-1 > d
        return _state(d, fv, has_simple_vertex=NO, has_simplex_facet=YES, is_simplicial=YES,
                      is_simple=NO, has_simple_edge=NO)
    if g.kind in ("simplex_product", "cube"):
        dims = g.params if g.kind == "simplex_product" else (1,) * d
        fv = _product_fvector(dims)
        sf = len(dims) == 1 or (len(dims) == 2 and 1 in dims)
        return _state(d, fv, has_simple_vertex=YES, has_simplex_facet=sf, is_simplicial=len(dims) == 1,
                      is_simple=YES, has_simple_edge=YES)
    if g.kind == "join":
        a, b = (predict(r).state for r in g.params)
        fv = None
        if a.fvector is not None and b.fvector is not None:
            fv = _join_fvector(a.fvector, a.d, b.fvector, b.d)
        sv = _or(_and(a.is_simplex, b.has_simple_vertex), _and(b.is_simplex, a.has_simple_vertex))
        sf = _or(_and(a.is_simplex, b.has_simplex_facet), _and(b.is_simplex, a.has_simplex_facet))
        both = _and(a.is_simplex, b.is_simplex)
        st = AbstractState(d, tuple(fv) if fv else None, (fv[0], fv[1]) if fv else None,
                           has_simple_vertex=sv, has_simplex_facet=sf,
                           is_simplicial=_and(a.is_simplicial, b.is_simplicial),
                           is_simple=YES if both is YES else _weaken(both),
                           has_simple_edge=YES if both is YES else UNKNOWN)
        return _degree_rule(st)
    raise RecipeInvalid(f"unknown generator {g.kind!r}")


@dataclass(frozen=True)
class Prediction:
    state: AbstractState
    recount_required: bool
    notes: tuple = ()

    @property
    def fpair(self) -> Optional[FPair]:
        return self.state.fpair


def _need(flag, what):
    if flag is NO:
        raise RecipeInvalid(f"recipe invalid: {what}")


def law_pyramid(s: AbstractState) -> AbstractState:
    d = s.d + 1
    fv = None
    if s.fvector is not None:
        f = _with_top(s.fvector)  # f[k+1] = f_k, k = -1..d-1
        fv = [f[k + 1] + f[k] for k in range(d)]
    simplex = s.is_simplex
    out = AbstractState(
        d, tuple(fv) if fv is not None else None,
        (s.pair[0] + 1, s.pair[0] + s.pair[1]) if s.pair else None,
        has_simple_vertex=s.has_simple_vertex,
        has_simplex_facet=_or(s.has_simplex_facet, simplex),
        is_simplicial=simplex, is_simple=simplex,
        has_simple_edge=s.has_simple_edge,
    )
    return _degree_rule(out)


def law_pyramid_over_simplex_facet(s: AbstractState) -> AbstractState:
    _need(s.has_simplex_facet, "no simplex facet")
    d = s.d
    fv = None
    if s.fvector is not None:
        fv = [x + comb(d, k) for k, x in enumerate(s.fvector)]
        fv[d - 1] = s.fvector[d - 1] + d - 1
    out = AbstractState(
        d, tuple(fv) if fv else None,
        (s.pair[0] + 1, s.pair[1] + d) if s.pair else None,
        has_simple_vertex=YES, has_simplex_facet=YES, is_simplicial=s.is_simplicial,
        is_simple=NO, has_simple_edge=NO if s.is_simplex else _weaken(s.has_simple_edge),
    )
    return _degree_rule(out)


def law_truncate_simple_vertex(s: AbstractState) -> AbstractState:
    _need(s.has_simple_vertex, "no simple vertex")
    d = s.d
    fv = None
    if s.fvector is not None:
        fv = list(s.fvector)
        fv[0] += d - 1
        for k in range(1, d - 1):
            fv[k] += comb(d, k + 1)
        fv[d - 1] += 1
    out = AbstractState(
        d, tuple(fv) if fv else None,
        (s.pair[0] + d - 1, s.pair[1] + comb(d, 2)) if s.pair else None,
        has_simple_vertex=YES, has_simplex_facet=YES, is_simplicial=NO,
        is_simple=s.is_simple, has_simple_edge=YES,
    )
    return _degree_rule(out)


def law_truncate_simple_edge(s: AbstractState) -> AbstractState:
    _need(s.has_simple_edge, "no simple edge")
    d = s.d
    prism = _product_fvector((1, d - 2))
    fv = None
    if s.fvector is not None:
        fv = list(s.fvector)
        fv[0] += prism[0] - 2
        fv[1] += prism[1] - 1
        for k in range(2, d - 1):
            fv[k] += prism[k]
        fv[d - 1] += 1
    out = AbstractState(
        d, tuple(fv) if fv else None,
        (s.pair[0] + 2 * d - 4, s.pair[1] + d * (d - 2)) if s.pair else None,
        has_simple_vertex=YES, has_simplex_facet=_weaken(s.has_simplex_facet), is_simplicial=NO,
        is_simple=s.is_simple, has_simple_edge=YES,
    )
    return _degree_rule(out)


def law_connected_sum(a: AbstractState, b: AbstractState) -> AbstractState:
    _need(a.has_simplex_facet, "no simplex facet")
    _need(b.has_simplex_facet, "no simplex facet in summand")
    if a.d != b.d:
        raise RecipeInvalid("recipe invalid: summands differ in dimension")
    d = a.d
    fv = None
    if a.fvector is not None and b.fvector is not None:
        fv = [x + y - comb(d, k + 1) for k, (x, y) in enumerate(zip(a.fvector, b.fvector))]
        fv[d - 1] = a.fvector[d - 1] + b.fvector[d - 1] - 2
    pair = None
    if a.pair and b.pair:
        pair = (a.pair[0] + b.pair[0] - d, a.pair[1] + b.pair[1] - comb(d, 2))
    simplicial = _and(a.is_simplicial, b.is_simplicial)
    out = AbstractState(
        d, tuple(fv) if fv else None, pair,
        has_simple_vertex=_weaken(_or(a.has_simple_vertex, b.has_simple_vertex)),
        has_simplex_facet=YES if (a.is_simplicial is YES or b.is_simplicial is YES) else UNKNOWN,
        is_simplicial=simplicial, is_simple=NO,
        has_simple_edge=_weaken(_or(a.has_simple_edge, b.has_simple_edge)),
    )
    return _degree_rule(out)


def law_polar_dual(s: AbstractState) -> AbstractState:
    d = s.d
    fv = tuple(reversed(s.fvector)) if s.fvector is not None else None
    sedge = UNKNOWN
    if s.is_simplicial is YES:
        sedge = YES
    elif s.has_simplex_facet is NO:
        sedge = NO
    out = AbstractState(
        d, fv, (fv[0], fv[1]) if fv else None,
        has_simple_vertex=s.has_simplex_facet, has_simplex_facet=s.has_simple_vertex,
        is_simplicial=s.is_simple, is_simple=s.is_simplicial, has_simple_edge=sedge,
    )
    return _degree_rule(out)


def law_stack_over_face(s: AbstractState) -> AbstractState:
    # the effect depends on the face; only the lattice knows
    return AbstractState(s.d, None, None, is_simplicial=YES if s.is_simplicial is YES else UNKNOWN)


def predict(r: Recipe) -> Prediction:
    """Compose the transition laws along a recipe."""
    st = seed_state(r.seed)
    recount = False
    notes = []
    if r.seed.kind == "join" and any(predict(p).recount_required for p in r.seed.params):
        recount = True
    for s in r.steps:
        if s.op == "pyramid":
            st = law_pyramid(st)
        elif s.op == "pyramid_over_facet":
            if s.select != "first_simplex":
                st = AbstractState(st.d, None, None)
                recount = True
                notes.append("facet pyramid over a non-simplex facet")
            else:
                st = law_pyramid_over_simplex_facet(st)
        elif s.op == "truncate_simple_vertex":
            st = law_truncate_simple_vertex(st)
        elif s.op == "truncate_simple_edge":
            st = law_truncate_simple_edge(st)
            if st.d != 6:
                recount = True
                notes.append("edge truncation outside d=6 is checked by recount")
        elif s.op == "connected_sum":
            other = predict(s.other)
            recount = recount or other.recount_required
            st = law_connected_sum(st, other.state)
        elif s.op == "polar_dual":
            st = law_polar_dual(st)
        elif s.op == "stack_over_face":
            st = law_stack_over_face(st)
            recount = True
            notes.append("stacking over a lower face is counted on the lattice")
        else:
            raise RecipeInvalid(f"unknown op {s.op!r}")
    if st.d > 7:
        raise RecipeInvalid("recipe invalid: dimension overflow")
    return Prediction(st, recount, tuple(notes))


def predict_fpair(r: Recipe) -> Prediction:
    return predict(r)


def expected_pair(r: Recipe) -> Optional[tuple]:
    """Pair the recipe should produce: law value, or the planner's recorded count."""
    p = predict(r)
    if p.fpair is not None:
        return p.fpair.as_tuple()
    return r.expected
