"""Ideal triangulations with lambda-length decorations.

A triangulation is a list of oriented triangles, each a triple of side-slots in
counterclockwise cyclic order, together with a pairing (gluing) of slots.  Side
k of a triangle is opposite corner k, so the ccw boundary runs
corner0 -> side2 -> corner1 -> side0 -> corner2 -> side1 -> corner0, and side k
is directed from corner k+1 to corner k+2.  A gluing always identifies two
slots reversing direction; with every triangle ccw this yields an oriented
surface, which is why a slot glued to itself is rejected as orientation
incoherent.  Unglued slots are boundary edges (the bordered variant used for
polygons).

Decorations are plain dicts edge id -> lambda length; edge coordinate vectors
are dicts edge id -> X.  Edge ids are assigned deterministically: edges sorted
by their smallest slot id, numbered from zero in that order.  Rational inputs
stay exact through every formula that avoids square roots.
"""

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from . import geometry
from .errors import (
    BadGluing,
    DegenerateHull,
    InvalidCycle,
    IterationLimit,
    NotFlippable,
    NonOrientable,
    PreconditionViolated,
    TooLarge,
    UnknownPuncture,
)


class IdealTriangulation:
    """Oriented ideal triangulation, closed or bordered."""

    def __init__(self, triangles, gluing):
        self.triangles = [tuple(t) for t in triangles]
        seen = set()
        for t in self.triangles:
            if len(t) != 3:
                raise BadGluing(f"triangle {t} does not have three sides")
            for s in t:
                if s in seen:
                    raise BadGluing(f"slot {s} listed twice")
                seen.add(s)
        self._slots = seen
        self.slot_pos = {}
        for ti, t in enumerate(self.triangles):
            for k, s in enumerate(t):
                self.slot_pos[s] = (ti, k)

        self.gluing = {}
        for pair in gluing:
            a, b = pair
            if a not in seen or b not in seen:
                raise BadGluing(f"gluing names unknown slot in {pair}")
            if a == b:
                raise NonOrientable(f"slot {a} glued to itself")
            if a in self.gluing or b in self.gluing:
                raise BadGluing(f"slot reused in gluing pair {pair}")
            self.gluing[a] = b
            self.gluing[b] = a

        # edges: glued pairs then boundary singletons, ordered by smallest slot
        groups = []
        done = set()
        for s in sorted(seen):
            if s in done:
                continue
            if s in self.gluing:
                p = self.gluing[s]
                groups.append((s, p))
                done.add(s)
                done.add(p)
            else:
                groups.append((s,))
                done.add(s)
        self.edges = groups
        self.edge_of_slot = {}
        for ei, g in enumerate(groups):
            for s in g:
                self.edge_of_slot[s] = ei
        self.num_edges = len(groups)
        self.internal_edges = [i for i, g in enumerate(groups) if len(g) == 2]
        self.boundary_edges = [i for i, g in enumerate(groups) if len(g) == 1]

        self._check_connected()
        self._build_vertices()

    # -- construction helpers -------------------------------------------------

    @classmethod
    def punctured_torus(cls):
        """Two triangles glued along all three edge pairs; genus 1, one puncture."""
        return cls([(0, 1, 2), (3, 4, 5)], [(0, 3), (1, 4), (2, 5)])

    @classmethod
    def four_punctured_sphere(cls):
        """Boundary of a tetrahedron: four triangles, six edges, four punctures."""
        tris = [(0, 1, 2), (3, 4, 5), (6, 7, 8), (9, 10, 11)]
        verts = [(1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1)]
        return cls._from_vertex_triples(4, tris, verts)

    @classmethod
    def polygon_fan(cls, n):
        """Fan triangulation of the n-gon from vertex 0 (bordered variant)."""
        if n < 3:
            raise BadGluing("polygon needs at least three vertices")
        verts = [(0, i, i + 1) for i in range(1, n - 1)]
        return cls.from_polygon_triangulation(n, verts)

    @classmethod
    def from_polygon_triangulation(cls, n, vertex_triples):
        """Build a bordered triangulation of the labeled n-gon.

        vertex_triples lists each triangle as a ccw triple of polygon vertex
        labels.  Records vertex_names mapping vertex-orbit ids back to the
        polygon labels, so edges can be read off as vertex pairs.
        """
        tris = [tuple(range(3 * i, 3 * i + 3)) for i in range(len(vertex_triples))]
        return cls._from_vertex_triples(n, tris, vertex_triples)

    @classmethod
    def _from_vertex_triples(cls, n, tris, vertex_triples):
        directed = {}
        for t, vt in zip(tris, vertex_triples):
            if len(set(vt)) != 3:
                raise BadGluing(f"degenerate triangle {vt}")
            for k in range(3):
                u, v = vt[(k + 1) % 3], vt[(k + 2) % 3]
                if (u, v) in directed:
                    raise NonOrientable(f"directed side {(u, v)} used twice")
                directed[(u, v)] = t[k]
        gluing = []
        for (u, v), s in directed.items():
            if (v, u) in directed and u < v:
                gluing.append((s, directed[(v, u)]))
        T = cls(tris, gluing)
        # name the vertex orbits by the polygon labels
        names = {}
        for t, vt in zip(tris, vertex_triples):
            ti = T.slot_pos[t[0]][0]
            for k in range(3):
                orb = T.vertex_of_corner[(ti, k)]
                label = vt[k]
                if names.get(orb, label) != label:
                    raise BadGluing("vertex identifications collapse distinct labels")
                names[orb] = label
        T.vertex_names = names
        return T

    # -- derived structure ----------------------------------------------------

    def _check_connected(self):
        if not self.triangles:
            raise BadGluing("no triangles")
        seenT = {0}
        queue = [0]
        while queue:
            t = queue.pop()
            for s in self.triangles[t]:
                p = self.gluing.get(s)
                if p is not None:
                    t2 = self.slot_pos[p][0]
                    if t2 not in seenT:
                        seenT.add(t2)
                        queue.append(t2)
        if len(seenT) != len(self.triangles):
            raise BadGluing("triangulation is not connected")

    def _build_vertices(self):
        parent = {}

        def find(x):
            while parent.get(x, x) != x:
                parent[x] = parent.get(parent[x], parent[x])
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)

        corners = [(t, k) for t in range(len(self.triangles)) for k in range(3)]
        for c in corners:
            parent.setdefault(c, c)
        for s, p in self.gluing.items():
            t, k = self.slot_pos[s]
            t2, k2 = self.slot_pos[p]
            union((t, (k + 1) % 3), (t2, (k2 + 2) % 3))
            union((t, (k + 2) % 3), (t2, (k2 + 1) % 3))
        orbits = {}
        for c in corners:
            orbits.setdefault(find(c), []).append(c)
        roots = sorted(orbits)
        self.vertex_of_corner = {}
        self.vertices = []
        for vid, r in enumerate(roots):
            self.vertices.append(tuple(sorted(orbits[r])))
            for c in orbits[r]:
                self.vertex_of_corner[c] = vid
        V = len(self.vertices)
        E = self.num_edges
        F = len(self.triangles)
        self.euler_characteristic = V - E + F
        self.is_closed = not self.boundary_edges
        if self.is_closed:
            chi = self.euler_characteristic
            if chi % 2:
                raise BadGluing("odd Euler characteristic")
            self.genus = (2 - chi) // 2
            self.num_punctures = V
        else:
            b = self._count_boundary_curves()
            self.num_boundary_curves = b
            self.genus = (2 - self.euler_characteristic - b) // 2

    def _count_boundary_curves(self):
        starts = {}
        for i in self.boundary_edges:
            (s,) = self.edges[i]
            t, k = self.slot_pos[s]
            v_from = self.vertex_of_corner[(t, (k + 1) % 3)]
            if v_from in starts:
                raise BadGluing("boundary is not a union of circles")
            starts[v_from] = i
        count = 0
        unseen = set(starts)
        while unseen:
            v = next(iter(unseen))
            count += 1
            while v in unseen:
                unseen.remove(v)
                (s,) = self.edges[starts[v]]
                t, k = self.slot_pos[s]
                v = self.vertex_of_corner[(t, (k + 2) % 3)]
        return count

    def edge_endpoints(self, e):
        """Vertex ids at the two ends of edge e (in the directed-side order)."""
        s = self.edges[e][0]
        t, k = self.slot_pos[s]
        return (
            self.vertex_of_corner[(t, (k + 1) % 3)],
            self.vertex_of_corner[(t, (k + 2) % 3)],
        )

    def edge_name(self, e):
        """Edge as a pair of polygon labels; needs vertex_names."""
        u, v = self.edge_endpoints(e)
        return frozenset((self.vertex_names[u], self.vertex_names[v]))

    def flanks(self, e):
        """(triangle, position) for each slot of edge e."""
        return [self.slot_pos[s] for s in self.edges[e]]

    def triangle_edges(self, t):
        """Edge ids of triangle t's sides, in slot order."""
        return [self.edge_of_slot[s] for s in self.triangles[t]]

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self, lam=None):
        out = {
            "schema": "arclab/1",
            "triangles": [list(t) for t in self.triangles],
            "gluing": sorted([min(a, b), max(a, b)] for a, b in self.gluing.items() if a < b),
        }
        if lam is not None:
            out["lambda"] = {str(e): _num_to_json(v) for e, v in sorted(lam.items())}
        return out

    @classmethod
    def from_json_dict(cls, obj):
        T = cls(obj["triangles"], obj["gluing"])
        lam = None
        if "lambda" in obj:
            lam = {int(k): _num_from_json(v) for k, v in obj["lambda"].items()}
        return T, lam


def _num_to_json(v):
    if isinstance(v, (int, Fraction)):
        f = Fraction(v)
        return {"num": f.numerator, "den": f.denominator}
    return float(v)


def _num_from_json(v):
    if isinstance(v, dict):
        return Fraction(v["num"], v["den"])
    if isinstance(v, int):
        return Fraction(v)
    return float(v)


# -- decorated coordinate calculus ---------------------------------------------


def triangle_h_lengths(T, lam, t):
    """Sector h-lengths of triangle t, indexed by the opposite side position."""
    ls = [lam[e] for e in T.triangle_edges(t)]
    return geometry.h_lengths(*ls)


def simplicial_coords(T, lam):
    """Simplicial coordinate of every edge.

    Each flanking triangle with sides (e, a, b) contributes
    (a^2 + b^2 - e^2)/(a b e); an edge flanked twice by the same triangle picks
    up both corner contributions; a boundary edge doubles its single one.
    """
    out = {}
    for e in range(T.num_edges):
        total = 0
        for (t, k) in T.flanks(e):
            le = lam[T.edge_of_slot[T.triangles[t][k]]]
            la = lam[T.edge_of_slot[T.triangles[t][(k + 1) % 3]]]
            lb = lam[T.edge_of_slot[T.triangles[t][(k + 2) % 3]]]
            term = geometry._div(la * la + lb * lb - le * le, la * lb * le)
            total = total + term
        if e in T.boundary_edges:
            total = total * 2
        out[e] = total
    return out


def flip_edge(T, lam, e):
    """Flip internal edge e, returning (T', lam') with the Ptolemy diagonal.

    Slot ids and hence edge ids are preserved; only the diagonal's lambda
    changes.  Raises NotFlippable for boundary or self-folded edges.
    """
    if len(T.edges[e]) != 2:
        raise NotFlippable(f"edge {e} is on the boundary")
    (t1, k1), (t2, k2) = T.flanks(e)
    if t1 == t2:
        raise NotFlippable(f"edge {e} is self-folded")
    tri1, tri2 = T.triangles[t1], T.triangles[t2]
    se1, sa, sb = tri1[k1], tri1[(k1 + 1) % 3], tri1[(k1 + 2) % 3]
    se2, sc, sd = tri2[k2], tri2[(k2 + 1) % 3], tri2[(k2 + 2) % 3]
    q = geometry.QuadData(
        a=lam[T.edge_of_slot[sa]],
        b=lam[T.edge_of_slot[sb]],
        c=lam[T.edge_of_slot[sc]],
        d=lam[T.edge_of_slot[sd]],
        e=lam[e],
    )
    f = geometry.ptolemy_flip(q)
    new_tris = list(T.triangles)
    new_tris[t1] = (se1, sb, sc)
    new_tris[t2] = (se2, sd, sa)
    pairs = [(a, b) for a, b in T.gluing.items() if a < b]
    T2 = IdealTriangulation(new_tris, pairs)
    if hasattr(T, "vertex_names"):
        T2.vertex_names = _transfer_names(T, T2)
    lam2 = dict(lam)
    lam2[e] = f
    return T2, lam2


def _transfer_names(T, T2):
    # names follow the unflipped edges: each edge kept its id, and away from
    # the flipped square its endpoints join the same polygon vertices
    names = {}
    votes = {}
    for e in range(T2.num_edges):
        u_old, v_old = T.edge_endpoints(e)
        u_new, v_new = T2.edge_endpoints(e)
        for old, new in ((u_old, u_new), (v_old, v_new)):
            votes.setdefault(new, []).append(T.vertex_names[old])
    for new, labels in votes.items():
        # the flipped diagonal contributes one stray vote per endpoint
        names[new] = max(set(labels), key=labels.count)
    return names


def canonical_key(T, lam=None):
    """Isomorphism-invariant key of a (decorated) triangulation.

    Minimum over all starting slots of a breadth-first relabeling; two
    triangulations are combinatorially isomorphic (with equal decorations) iff
    their keys are equal.
    """
    best = None
    for ti in range(len(T.triangles)):
        for rot in range(3):
            key = _bfs_key(T, lam, ti, rot)
            if best is None or key < best:
                best = key
    return best


def _bfs_key(T, lam, t0, rot0):
    order = {t0: rot0}
    visit = [t0]
    qi = 0
    while qi < len(visit):
        t = visit[qi]
        qi += 1
        rot = order[t]
        for dk in range(3):
            s = T.triangles[t][(rot + dk) % 3]
            p = T.gluing.get(s)
            if p is None:
                continue
            t2, k2 = T.slot_pos[p]
            if t2 not in order:
                order[t2] = k2
                visit.append(t2)
    new_id = {}
    for nt, t in enumerate(visit):
        rot = order[t]
        for dk in range(3):
            new_id[T.triangles[t][(rot + dk) % 3]] = 3 * nt + dk
    codes = []
    for nt, t in enumerate(visit):
        rot = order[t]
        for dk in range(3):
            s = T.triangles[t][(rot + dk) % 3]
            p = T.gluing.get(s)
            codes.append(-1 if p is None else new_id[p])
    lam_codes = ()
    if lam is not None:
        ecodes = {}
        for s, ns in new_id.items():
            e = T.edge_of_slot[s]
            ecodes.setdefault(e, ns)
            ecodes[e] = min(ecodes[e], ns)
        vals = []
        for e, ns in sorted(ecodes.items(), key=lambda kv: kv[1]):
            v = lam[e]
            if isinstance(v, (int, Fraction)):
                f = Fraction(v)
                vals.append((0, f.numerator, f.denominator))
            else:
                vals.append((1, float(v)))
        lam_codes = tuple(vals)
    return (len(T.triangles), tuple(codes), lam_codes)


# -- triangle cycles -------------------------------------------------------------


@dataclass(frozen=True)
class TriangleCycle:
    """Cyclic triangle sequence with consecutive shared edges.

    triangles[j] and triangles[j+1] share edges[j] (cyclically); the slot of
    edges[j-1] and the slot of edges[j] inside triangles[j] must differ, and
    the third side is the cycle's boundary edge b_j.
    """

    triangles: tuple
    edges: tuple

    def validated(self, T):
        n = len(self.triangles)
        if n != len(self.edges):
            raise InvalidCycle("triangle and edge lists differ in length")
        if n < 2:
            raise InvalidCycle("a cycle needs at least two triangles")
        for j in range(n):
            t = self.triangles[j]
            e_prev = self.edges[(j - 1) % n]
            e_next = self.edges[j]
            sides = T.triangle_edges(t)
            t_next = self.triangles[(j + 1) % n]
            if e_next not in sides or e_next not in T.triangle_edges(t_next):
                raise InvalidCycle(f"edge {e_next} not shared by steps {j},{j+1}")
            try:
                i_prev = sides.index(e_prev)
            except ValueError:
                raise InvalidCycle(f"edge {e_prev} missing from triangle {t}")
            rest = [i for i in range(3) if sides[i] == e_next and i != i_prev]
            if not rest:
                raise InvalidCycle(f"edges {e_prev},{e_next} collide in triangle {t}")
        return self

    def boundary_sides(self, T):
        """Position of b_j inside each triangle of the cycle."""
        n = len(self.triangles)
        out = []
        for j in range(n):
            t = self.triangles[j]
            sides = T.triangle_edges(t)
            i_prev = sides.index(self.edges[(j - 1) % n])
            i_next = next(i for i in range(3) if sides[i] == self.edges[j] and i != i_prev)
            (i_b,) = [i for i in range(3) if i not in (i_prev, i_next)]
            out.append(i_b)
        return out


def telescoping_check(T, lam, cycle):
    """Both sides of the telescoping identity around a triangle cycle.

    Returns (sum of consecutive-edge simplicial coordinates,
    2 * sum of the sector h-lengths opposite the boundary edges).  The two
    agree identically; with Fractions the equality is exact.
    """
    cycle.validated(T)
    coords = simplicial_coords(T, lam)
    lhs = sum(coords[e] for e in cycle.edges)
    rhs = 0
    for t, i_b in zip(cycle.triangles, cycle.boundary_sides(T)):
        hs = triangle_h_lengths(T, lam, t)
        rhs = rhs + hs[i_b]
    return lhs, 2 * rhs


def enumerate_triangle_cycles(T, cap=30):
    """All simple cycles of the dual graph, as TriangleCycle objects.

    Simple means distinct triangles and distinct edges; length-two cycles
    through a pair of parallel dual edges count.  Raises TooLarge beyond cap
    internal edges.
    """
    if len(T.internal_edges) > cap:
        raise TooLarge(f"{len(T.internal_edges)} internal edges exceeds cap {cap}")
    adj = {}
    for e in T.internal_edges:
        (t1, _), (t2, _) = T.flanks(e)
        if t1 == t2:
            continue  # self-folded: no valid cycle uses a dual loop
        adj.setdefault(t1, []).append((t2, e))
        adj.setdefault(t2, []).append((t1, e))
    found = set()
    cycles = []

    def canon(tris, eids):
        n = len(tris)
        best = None
        for r in range(n):
            for flip in (False, True):
                if not flip:
                    ts = tuple(tris[(r + i) % n] for i in range(n))
                    es = tuple(eids[(r + i) % n] for i in range(n))
                else:
                    ts = tuple(tris[(r - i) % n] for i in range(n))
                    es = tuple(eids[(r - i - 1) % n] for i in range(n))
                key = (ts, es)
                if best is None or key < best:
                    best = key
        return best

    def dfs(start, path_t, path_e, used_e):
        cur = path_t[-1]
        for (nxt, e) in adj.get(cur, ()):
            if e in used_e:
                continue
            if nxt == start and len(path_t) >= 2:
                key = canon(path_t, path_e + [e])
                if key not in found:
                    found.add(key)
                    cycles.append(TriangleCycle(tuple(key[0]), tuple(key[1])).validated(T))
            elif nxt > start and nxt not in path_t:
                dfs(start, path_t + [nxt], path_e + [e], used_e | {e})

    for start in sorted(adj):
        dfs(start, [start], [], set())
    return cycles


def no_vanishing_cycle(T, X, cap=30):
    """Whether every simple dual cycle has positive coordinate sum.

    For entrywise nonnegative X this decides the full condition over all
    closed non-backtracking triangle cycles (a subgraph admits one iff it
    contains a simple cycle); for general X only simple cycles are inspected.
    """
    for cyc in enumerate_triangle_cycles(T, cap=cap):
        if not sum(X[e] for e in cyc.edges) > 0:
            return False
    return True


def coordinate_bound_check(T, lam, tol=1e-9, cap=30):
    """Bound check: lambda_e * E_e <= 4 and strict triangle inequalities.

    Hypothesis: every simplicial coordinate nonnegative and no vanishing
    cycle; raises PreconditionViolated outside it.  Returns True when the
    product bound holds on every edge (within tol) and every decorated
    triangle satisfies the strict triangle inequalities.
    """
    coords = simplicial_coords(T, lam)
    if any(c < -tol for c in coords.values()):
        raise PreconditionViolated("negative simplicial coordinate")
    if not no_vanishing_cycle(T, coords, cap=cap):
        raise PreconditionViolated("a vanishing cycle is present")
    for e, c in coords.items():
        if not float(lam[e]) * float(c) <= 4 + tol:
            return False
    for t in range(len(T.triangles)):
        ls = [float(lam[e]) for e in T.triangle_edges(t)]
        if not geometry.equidistant_exists(*ls):
            return False
    return True


def rescale_decoration(T, lam, vertex, s):
    """Scale the horocycle at one puncture: sqrt(s) per edge end there."""
    if not 0 <= vertex < len(T.vertices):
        raise UnknownPuncture(f"no vertex {vertex}")
    root = _sqrt_maybe_exact(s)
    out = {}
    for e in range(T.num_edges):
        u, v = T.edge_endpoints(e)
        count = (u == vertex) + (v == vertex)
        val = lam[e]
        for _ in range(count):
            val = val * root
        out[e] = val
    return out


def _sqrt_maybe_exact(s):
    if isinstance(s, (int, Fraction)):
        f = Fraction(s)
        rn, rd = math.isqrt(f.numerator), math.isqrt(f.denominator)
        if rn * rn == f.numerator and rd * rd == f.denominator:
            return Fraction(rn, rd)
    return math.sqrt(float(s))


# -- hull cell and flip search ---------------------------------------------------


def convex_hull_cell(points, tol=1e-9):
    """Diagonals of the polygon appearing as extreme edges of the hull.

    points: light-cone points in the polygon's cyclic vertex order.  A diagonal
    {i,j} belongs to the cell iff a plane <x,w> = -1 through p_i, p_j leaves
    every other point strictly on the far side; degenerate (coplanar, E = 0)
    diagonals are absent.  Raises DegenerateHull for repeated rays, non-convex
    listings, or fewer than four points.
    """
    from scipy.optimize import linprog

    n = len(points)
    if n < 4:
        raise DegenerateHull("need at least four points")
    pts = []
    for p in points:
        geometry.validate_light_cone(p)
        pts.append((float(p[0]), float(p[1]), float(p[2])))
    ang = [math.atan2(p[1] / p[2], p[0] / p[2]) for p in pts]
    rel = [(ang[i] - ang[0]) % (2 * math.pi) for i in range(n)]
    if len({round(a, 12) for a in rel}) != n:
        raise DegenerateHull("two points lie on the same ray")
    increasing = all(rel[i] < rel[i + 1] for i in range(n - 1))
    decreasing = all(rel[i] > rel[i + 1] for i in range(1, n - 1))
    if not (increasing or decreasing):
        raise DegenerateHull("listed order is not the convex cyclic order")

    cell = set()
    for i in range(n):
        for j in range(i + 1, n):
            if (j - i) % n in (1, n - 1):
                continue
            A_eq = [
                [pts[i][0], pts[i][1], -pts[i][2], 0.0],
                [pts[j][0], pts[j][1], -pts[j][2], 0.0],
            ]
            b_eq = [-1.0, -1.0]
            A_ub = []
            b_ub = []
            for k in range(n):
                if k in (i, j):
                    continue
                A_ub.append([pts[k][0], pts[k][1], -pts[k][2], 1.0])
                b_ub.append(-1.0)
            res = linprog(
                [0.0, 0.0, 0.0, -1.0],
                A_ub=A_ub,
                b_ub=b_ub,
                A_eq=A_eq,
                b_eq=b_eq,
                bounds=[(None, None)] * 4,
                method="highs",
            )
            if res.status == 3:
                raise DegenerateHull("unbounded support problem for a diagonal")
            if res.status not in (0, 2):
                raise DegenerateHull(f"support solve failed: {res.message}")
            if res.status == 0 and -res.fun > tol:
                cell.add(frozenset((i, j)))
    return cell


def delaunay_flip_search(T, lam, tol=1e-9, guard_factor=10):
    """Flip most-negative internal edges until all coordinates are nonnegative.

    Pivot: the internal flippable edge with the most negative simplicial
    coordinate, ties broken by lowest edge id.  The guard is
    guard_factor * (number of edges)^2 flips; exceeding it raises
    IterationLimit carrying the flip trace.  Returns (T', lam', cell) where
    cell is the set of internal edge ids with coordinate > tol.
    """
    exact = all(isinstance(v, (int, Fraction)) for v in lam.values())
    cut = 0 if exact else tol
    limit = guard_factor * T.num_edges * T.num_edges
    trace = []
    cur_T, cur_lam = T, dict(lam)
    for _ in range(limit + 1):
        coords = simplicial_coords(cur_T, cur_lam)
        worst = None
        for e in cur_T.internal_edges:
            (t1, _), (t2, _) = cur_T.flanks(e)
            if t1 == t2:
                continue
            c = coords[e]
            if c < -cut and (worst is None or c < coords[worst]):
                worst = e
        if worst is None:
            cell = {e for e in cur_T.internal_edges if coords[e] > cut}
            return cur_T, cur_lam, cell
        if len(trace) >= limit:
            raise IterationLimit("flip search exceeded its guard", trace)
        trace.append(worst)
        cur_T, cur_lam = flip_edge(cur_T, cur_lam, worst)
    raise IterationLimit("flip search exceeded its guard", trace)
