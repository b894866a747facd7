"""Exact rational geometry: affine rank, facet enumeration, extreme points.

Everything here works over ``fractions.Fraction``.  The facet enumeration
converts points to integer homogeneous coordinates and runs a plain
double-description pass over the cone of valid inequalities, so the hot
loop only ever touches Python ints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, Sequence

Rational = Fraction
Point = tuple  # tuple of Fraction, length = ambient dimension


class GeometryError(ValueError):
    pass


class DegeneratePolytope(GeometryError):
    def __init__(self, msg="degenerate polytope"):
        super().__init__(msg)


class RedundantPoint(GeometryError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"point {index} is not a vertex of the hull")


def parse_rational(s) -> Fraction:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise GeometryError(f"coordinate must be a string, got {s!r}")
    s = s.strip()
    num, _, den = s.partition("/")
    try:
        if den:
            if int(den) <= 0:
                raise GeometryError(f"bad denominator in {s!r}")
            return Fraction(int(num), int(den))
        return Fraction(int(num))
    except ValueError:
        raise GeometryError(f"not a rational: {s!r}") from None


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def as_point(coords: Iterable) -> Point:
    return tuple(parse_rational(c) if isinstance(c, str) else Fraction(c) for c in coords)


def _check_points(points: Sequence[Sequence]) -> int:
    if len(points) == 0:
        raise GeometryError("empty point set")
    n = len(points[0])
    for p in points:
        if len(p) != n:
            raise GeometryError("dimension mismatch")
    return n


def _row_reduce(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Return the nonzero rows of a row echelon form (exact)."""
    rows = [list(r) for r in rows]
    out = []
    ncols = len(rows[0]) if rows else 0
    col = 0
    while rows and col < ncols:
        piv = next((r for r in rows if r[col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows.remove(piv)
        out.append(piv)
        pc = piv[col]
        for r in rows:
            if r[col] != 0:
                f = r[col] / pc
                for j in range(col, ncols):
                    r[j] -= f * piv[j]
        col += 1
    return out


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return len(_row_reduce([[Fraction(x) for x in r] for r in rows]))


def affine_rank(points: Sequence[Sequence]) -> int:
    """Dimension of the affine hull of ``points``."""
    _check_points(points)
    p0 = points[0]
    diffs = [[Fraction(a) - Fraction(b) for a, b in zip(p, p0)] for p in points[1:]]
    return rank(diffs)


def solve(mat: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """Solve a square nonsingular system exactly."""
    n = len(mat)
    aug = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(mat, rhs)]
    for c in range(n):
        piv = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if piv is None:
            raise GeometryError("singular system")
        aug[c], aug[piv] = aug[piv], aug[c]
        pc = aug[c][c]
        aug[c] = [x / pc for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [aug[r][n] for r in range(n)]


def nullspace_vector(rows: Sequence[Sequence], ncols: int) -> list[Fraction]:
    """Some nonzero vector orthogonal to all rows (rows must have rank ncols-1)."""
    ech = _row_reduce([[Fraction(x) for x in r] for r in rows])
    pivots = []
    for r in ech:
        pivots.append(next(j for j, x in enumerate(r) if x != 0))
    free = [j for j in range(ncols) if j not in pivots]
    if len(free) != 1:
        raise GeometryError("nullspace is not one-dimensional")
    x = [Fraction(0)] * ncols
    x[free[0]] = Fraction(1)
    for r, pc in reversed(list(zip(ech, pivots))):
        s = sum(r[j] * x[j] for j in range(pc + 1, ncols))
        x[pc] = -s / r[pc]
    return x


@dataclass(frozen=True)
class Hyperplane:
    """{x : normal . x = offset}, scaled so the first nonzero normal entry is 1."""

    normal: tuple
    offset: Fraction

    @staticmethod
    def canonical(normal: Sequence, offset) -> "Hyperplane":
        normal = [Fraction(x) for x in normal]
        lead = next((x for x in normal if x != 0), None)
        if lead is None:
            raise GeometryError("zero normal")
        return Hyperplane(tuple(x / lead for x in normal), Fraction(offset) / lead)

    def value(self, x: Sequence) -> Fraction:
        return sum((a * b for a, b in zip(self.normal, x)), Fraction(0)) - self.offset


@dataclass(frozen=True)
class Facet:
    """A facet: its plane, plus the sign (+1/-1) turning it into normal.x <= offset,
    and the sorted indices of the vertices on it."""

    plane: Hyperplane
    incident: tuple
    sign: int = 1

    def inequality(self) -> tuple[tuple, Fraction]:
        s = self.sign
        return tuple(s * a for a in self.plane.normal), s * self.plane.offset


@dataclass(frozen=True)
class VPolytope:
    dim: int
    vertices: tuple

    @staticmethod
    def from_points(points: Iterable[Sequence], dim: int | None = None) -> "VPolytope":
        pts = tuple(as_point(p) for p in points)
        if dim is None:
            dim = _check_points(pts)
        return VPolytope(dim, pts)

    @property
    def nvertices(self) -> int:
        return len(self.vertices)

    def to_json(self) -> dict:
        return {
            "dimension": self.dim,
            "vertices": [[format_rational(c) for c in v] for v in self.vertices],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1) + "\n"

    @staticmethod
    def from_json(obj: dict) -> "VPolytope":
        try:
            d = int(obj["dimension"])
            verts = obj["vertices"]
        except (KeyError, TypeError, ValueError):
            raise GeometryError("malformed polytope JSON") from None
        pts = tuple(tuple(parse_rational(c) for c in v) for v in verts)
        for p in pts:
            if len(p) != d:
                raise GeometryError("dimension mismatch")
        return VPolytope(d, pts)

    @staticmethod
    def loads(text: str) -> "VPolytope":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise GeometryError(f"bad JSON: {e}") from None
        return VPolytope.from_json(obj)


# -- integer homogeneous double description ---------------------------------


def _homogenize(points: Sequence[Point]) -> list[tuple]:
    out = []
    for p in points:
        L = 1
        for c in p:
            L = lcm(L, c.denominator)
        out.append(tuple(int(c * L) for c in p) + (L,))
    return out


def _primitive(v: Sequence[int]) -> tuple:
    g = 0
    for x in v:
        g = gcd(g, x)
    if g > 1:
        return tuple(x // g for x in v)
    return tuple(v)


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _initial_basis(H: list[tuple], dim: int) -> list[int]:
    """Indices of dim+1 homogeneous points that are linearly independent."""
    chosen: list[int] = []
    ech: list[list[Fraction]] = []
    pivots: list[int] = []
    for i, h in enumerate(H):
        r = [Fraction(x) for x in h]
        for row, pc in zip(ech, pivots):
            if r[pc] != 0:
                f = r[pc] / row[pc]
                r = [a - f * b for a, b in zip(r, row)]
        pc = next((j for j, x in enumerate(r) if x != 0), None)
        if pc is None:
            continue
        ech.append(r)
        pivots.append(pc)
        chosen.append(i)
        if len(chosen) == dim + 1:
            return chosen
    raise DegeneratePolytope()


def _double_description(H: list[tuple], dim: int) -> list[tuple[tuple, int]]:
    """Extreme rays of {c : c.h <= 0 for all h in H} with their zero-set bitmasks."""
    n = len(H)
    base = _initial_basis(H, dim)
    M = [list(H[i]) for i in base]
    # rays are the columns of -M^{-1}; solve M x = -e_j per column
    rays: list[tuple] = []
    masks: list[int] = []
    for j in range(dim + 1):
        e = [0] * (dim + 1)
        e[j] = -1
        x = solve(M, e)
        L = 1
        for c in x:
            L = lcm(L, c.denominator)
        rays.append(_primitive([int(c * L) for c in x]))
        masks.append(sum(1 << base[k] for k in range(dim + 1) if k != j))
    need = dim - 1  # common zeros needed for adjacency
    in_base = set(base)
    for i in range(n):
        if i in in_base:
            continue
        h = H[i]
        bit = 1 << i
        vals = [_dot(r, h) for r in rays]
        pos = [k for k, s in enumerate(vals) if s > 0]
        if not pos:
            for k, s in enumerate(vals):
                if s == 0:
                    masks[k] |= bit
            continue
        neg = [k for k, s in enumerate(vals) if s < 0]
        zero = [k for k, s in enumerate(vals) if s == 0]
        new_rays = []
        new_masks = []
        for p in pos:
            mp = masks[p]
            rp = rays[p]
            sp = vals[p]
            for q in neg:
                common = mp & masks[q]
                if common.bit_count() < need:
                    continue
                ok = True
                for k in range(len(rays)):
                    if k != p and k != q and masks[k] & common == common:
                        ok = False
                        break
                if not ok:
                    continue
                sq = vals[q]
                rq = rays[q]
                new_rays.append(_primitive([sp * b - sq * a for a, b in zip(rp, rq)]))
                new_masks.append(common | bit)
        keep = neg + zero
        rays = [rays[k] for k in keep] + new_rays
        masks = [masks[k] for k in neg] + [masks[k] | bit for k in zero] + new_masks
    return list(zip(rays, masks))


def _mask_indices(m: int) -> tuple:
    out = []
    i = 0
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class _Hull:
    facets: tuple  # of Facet, canonical order
    masks: tuple  # incidence bitmask per facet
    vertex_ok: tuple  # per input point: is it a vertex


def _hull(points: tuple, dim: int) -> _Hull:
    if len(points) <= dim:
        raise DegeneratePolytope()
    H = _homogenize(points)
    raw = _double_description(H, dim)
    entries = []
    for ray, mask in raw:
        normal = [Fraction(x) for x in ray[:dim]]
        offset = Fraction(-ray[dim])
        # ray . (x, 1) <= 0  <=>  normal . x <= offset
        lead = next(x for x in normal if x != 0)
        plane = Hyperplane.canonical(normal, offset)
        sign = 1 if lead > 0 else -1
        entries.append((_mask_indices(mask), plane, sign, mask))
    entries.sort(key=lambda e: e[0])
    facets = tuple(Facet(plane, inc, sign) for inc, plane, sign, _ in entries)
    masks = tuple(e[3] for e in entries)
    full = (1 << len(points)) - 1
    ok = []
    for i in range(len(points)):
        acc = full
        for m in masks:
            if m >> i & 1:
                acc &= m
        ok.append(acc == 1 << i)
    return _Hull(facets, masks, tuple(ok))


@lru_cache(maxsize=512)
def _hull_cached(points: tuple, dim: int) -> _Hull:
    return _hull(points, dim)


def facet_enumeration(P: VPolytope) -> list[Facet]:
    """All facets of P in canonical order (sorted by incident vertex tuple).

    Raises DegeneratePolytope if P is not full-dimensional and RedundantPoint
    naming the first listed point that is not a vertex.
    """
    if affine_rank(P.vertices) != P.dim:
        raise DegeneratePolytope()
    h = _hull_cached(P.vertices, P.dim)
    for i, ok in enumerate(h.vertex_ok):
        if not ok:
            raise RedundantPoint(i)
    return list(h.facets)


def extreme_points(points: Sequence[Sequence], dim: int) -> list[Point]:
    """The points that are vertices of their convex hull, in input order.

    Repeated points are collapsed to their first occurrence.
    """
    pts = [as_point(p) for p in points]
    _check_points(pts)
    seen = set()
    uniq = []
    for p in pts:
        if p not in seen:
            seen.add(p)
            uniq.append(p)
    if affine_rank(uniq) != dim or len(uniq[0]) != dim:
        raise DegeneratePolytope()
    h = _hull(tuple(uniq), dim)
    return [p for p, ok in zip(uniq, h.vertex_ok) if ok]


def facet_through(points: Sequence[Point], dim: int) -> Hyperplane:
    """The canonical hyperplane through an affinely (dim-1)-dimensional point set."""
    rows = [list(p) + [Fraction(-1)] for p in points]
    v = nullspace_vector(rows, dim + 1)
    return Hyperplane.canonical(v[:dim], v[dim])


def centroid(points: Sequence[Point]) -> Point:
    n = len(points)
    return tuple(sum(c) / n for c in zip(*points))


def normalize_points(points: Sequence[Point]) -> tuple:
    """Scale all points by one positive rational so the coordinates become
    coprime integers.  Keeps bit sizes down between construction steps."""
    L = 1
    for p in points:
        for c in p:
            L = lcm(L, c.denominator)
    ints = [[int(c * L) for c in p] for p in points]
    g = 0
    for p in ints:
        for c in p:
            g = gcd(g, c)
    g = g or 1
    return tuple(tuple(Fraction(c // g) for c in p) for p in ints)


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def invert(mat: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(mat)
    cols = [solve(mat, [int(i == j) for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]
