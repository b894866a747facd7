"""Face lattices built from vertex-facet incidences, plus graph utilities."""

from __future__ import annotations

import hashlib
import json
from collections import Counter, deque
from dataclasses import dataclass
from functools import cached_property

from .geometry import VPolytope, facet_enumeration


class LatticeError(ValueError):
    pass


def mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def indices_of(m: int) -> tuple:
    out = []
    i = 0
    while m:
        low = m & -m
        i = low.bit_length() - 1
        out.append(i)
        m ^= low
    return tuple(out)


@dataclass(frozen=True)
class FPair:
    d: int
    f0: int
    f1: int

    @property
    def excess(self) -> int:
        return 2 * self.f1 - self.d * self.f0

    def as_tuple(self) -> tuple:
        return (self.f0, self.f1)

    def to_json(self) -> dict:
        return {"d": self.d, "f0": self.f0, "f1": self.f1, "excess": self.excess}


@dataclass(frozen=True)
class PolytopeGraph:
    nvertices: int
    edges: tuple  # sorted (u, v) pairs with u < v

    @cached_property
    def adjacency(self) -> tuple:
        adj = [set() for _ in range(self.nvertices)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(frozenset(a) for a in adj)

    @property
    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]


def _close_down(facet_masks: list[int], d: int) -> list[list[int]]:
    """faces[k] = masks of k-faces, computed by intersecting facets top-down."""
    faces: list[list[int]] = [[] for _ in range(d)]
    faces[d - 1] = sorted(set(facet_masks))
    if len(faces[d - 1]) != len(facet_masks):
        raise LatticeError("inconsistent incidence")
    for k in range(d - 1, 0, -1):
        sub = set()
        for F in faces[k]:
            cands = set()
            for G in facet_masks:
                x = F & G
                if x and x != F:
                    cands.add(x)
            # keep the maximal intersections: these are the facets of F
            ordered = sorted(cands, key=lambda m: -m.bit_count())
            maximal: list[int] = []
            for m in ordered:
                if not any(m & M == m for M in maximal):
                    maximal.append(m)
            sub.update(maximal)
        faces[k - 1] = sorted(sub)
    return faces


@dataclass(frozen=True)
class FaceLattice:
    dim: int
    nvertices: int
    masks: tuple  # masks[k] = tuple of vertex bitmasks of the k-faces

    @property
    def faces_by_dim(self) -> list[list[tuple]]:
        return [sorted(indices_of(m) for m in level) for level in self.masks]

    @property
    def facets(self) -> list[tuple]:
        return self.faces_by_dim[self.dim - 1]

    @property
    def fvector(self) -> tuple:
        return tuple(len(level) for level in self.masks)

    @cached_property
    def graph(self) -> PolytopeGraph:
        # a segment is its own single edge
        level = self.masks[1] if self.dim > 1 else (mask_of(range(self.nvertices)),)
        edges = sorted(indices_of(m) for m in level)
        return PolytopeGraph(self.nvertices, tuple(edges))

    def to_json(self) -> dict:
        return {"dimension": self.dim, "fvector": list(self.fvector), "facets": [list(f) for f in self.facets]}

    def facet_checksum(self) -> str:
        """sha256 of the sorted facet vertex-index lists, serialized as compact JSON."""
        blob = json.dumps(self.facets, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def facets_containing(self, m: int) -> list[int]:
        return [F for F in self.masks[self.dim - 1] if F & m == m]


def lattice_from_facets(dim: int, nvertices: int, facet_sets) -> FaceLattice:
    fm = [mask_of(f) for f in facet_sets]
    if dim == 1:
        masks = (tuple(sorted(fm)),)
    else:
        masks = tuple(tuple(level) for level in _close_down(fm, dim))
    L = FaceLattice(dim, nvertices, masks)
    _check_lattice(L)
    return L


def _check_lattice(L: FaceLattice):
    d = L.dim
    if sorted(L.masks[0]) != [1 << i for i in range(L.nvertices)]:
        raise LatticeError("inconsistent incidence")
    if d >= 2 and any(m.bit_count() != 2 for m in L.masks[1]):
        raise LatticeError("inconsistent incidence")
    seen = set()
    for k, level in enumerate(L.masks):
        for m in level:
            if m in seen or m.bit_count() < k + 1:
                raise LatticeError("inconsistent incidence")
            seen.add(m)
    if euler_characteristic(L) != 1 - (-1) ** d:
        raise LatticeError("inconsistent incidence: Euler-Poincare fails")


def euler_characteristic(L: FaceLattice) -> int:
    return sum((-1) ** k * f for k, f in enumerate(L.fvector))


def build_face_lattice(P: VPolytope, facets=None) -> FaceLattice:
    if facets is None:
        facets = facet_enumeration(P)
    return lattice_from_facets(P.dim, P.nvertices, [f.incident for f in facets])


def fpair(L: FaceLattice) -> FPair:
    fv = L.fvector
    return FPair(L.dim, fv[0], fv[1] if L.dim > 1 else 0)


def simple_vertices(L: FaceLattice) -> set[int]:
    return {v for v, k in enumerate(L.graph.degrees) if k == L.dim}


def simple_edges(L: FaceLattice) -> set[tuple]:
    """Edges with both endpoints simple that lie on exactly d-1 facets."""
    sv = simple_vertices(L)
    out = set()
    for m in L.masks[1]:
        u, v = indices_of(m)
        if u in sv and v in sv and len(L.facets_containing(m)) == L.dim - 1:
            out.add((u, v))
    return out


def gon_census(L: FaceLattice) -> dict[int, int]:
    if L.dim < 3:
        return {}
    return dict(sorted(Counter(m.bit_count() for m in L.masks[2]).items()))


def combinatorial_dual(L: FaceLattice) -> FaceLattice:
    """Order-reversed lattice; vertex j of the dual is facet j of L (canonical order)."""
    d = L.dim
    facet_masks = sorted(L.masks[d - 1], key=indices_of)
    # dual facet for each vertex v: the facets containing v
    dual_facets = []
    for v in range(L.nvertices):
        dual_facets.append([j for j, F in enumerate(facet_masks) if F >> v & 1])
    return lattice_from_facets(d, len(facet_masks), dual_facets)


def simplex_facets(L: FaceLattice) -> list[tuple]:
    """Facets with exactly d vertices, canonical order."""
    return [f for f in L.facets if len(f) == L.dim]


# -- connectivity ------------------------------------------------------------


def _local_connectivity_at_least(adj, s: int, t: int, k: int) -> bool:
    """Vertex-disjoint s-t paths >= k, by augmenting paths on the split graph."""
    # node 2v = v_in, 2v+1 = v_out; capacity 1 on v_in->v_out (except s, t)
    cap: dict[tuple, int] = {}
    nbrs: dict[int, list] = {}

    def add(a, b, c):
        if (a, b) not in cap:
            nbrs.setdefault(a, []).append(b)
            nbrs.setdefault(b, []).append(a)
            cap[(a, b)] = 0
            cap.setdefault((b, a), 0)
        cap[(a, b)] += c

    big = len(adj) + 1
    for v in range(len(adj)):
        add(2 * v, 2 * v + 1, big if v in (s, t) else 1)
        for w in adj[v]:
            add(2 * v + 1, 2 * w, big)
    src, snk = 2 * s + 1, 2 * t
    flow = 0
    while flow < k:
        prev = {src: None}
        q = deque([src])
        while q and snk not in prev:
            a = q.popleft()
            for b in nbrs.get(a, ()):
                if b not in prev and cap[(a, b)] > 0:
                    prev[b] = a
                    q.append(b)
        if snk not in prev:
            return False
        b = snk
        while prev[b] is not None:
            a = prev[b]
            cap[(a, b)] -= 1
            cap[(b, a)] += 1
            b = a
        flow += 1
    return True


def vertex_connectivity_at_least(G: PolytopeGraph, k: int) -> bool:
    """True iff G stays connected after deleting any k-1 vertices (and has > k vertices)."""
    if k <= 0:
        return True
    n = G.nvertices
    adj = G.adjacency
    if n <= k:
        return False
    # Even's check: it suffices to test pairs whose first vertex is among v_0..v_{k-1}
    for i in range(k):
        for j in range(i + 1, n):
            if j not in adj[i] and not _local_connectivity_at_least(adj, i, j, k):
                return False
    return True


def polar_dual(P: VPolytope) -> VPolytope:
    """Polar of P about its vertex centroid; vertex j of the result is facet j of P.

    Coordinates are rescaled to primitive integers (a positive scaling, so the
    combinatorics are untouched).
    """
    from .geometry import centroid, normalize_points

    o = centroid(P.vertices)
    pts = []
    for f in facet_enumeration(P):
        a, b = f.inequality()
        beta = b - sum(x * y for x, y in zip(a, o))
        pts.append(tuple(x / beta for x in a))
    return VPolytope(P.dim, normalize_points(pts))
