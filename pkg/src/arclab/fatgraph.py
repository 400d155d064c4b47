"""Ribbon graphs: half-edge combinatorics, duality, moves, recurrence.

A fatgraph is a set of half-edges with a rotation (cyclic order at each
vertex) and a fixed-point-free pairing.  The face permutation is rotation
composed after pairing; its orbits are the boundary cycles of the thickened
surface, so V - E = 2 - 2g - b holds with integer g >= 0.  Vertices need
valence three or more unless a construction explicitly relaxes that (graph
restrictions, backbone models).
"""

from .errors import (
    BadGluing,
    LoopEdge,
    PreconditionViolated,
    TooLarge,
)


class Fatgraph:
    """Immutable fatgraph over hashable half-edge ids."""

    def __init__(self, rotations, pairing, allow_low_valence=False):
        self.rotations = [tuple(r) for r in rotations]
        seen = set()
        for r in self.rotations:
            if not allow_low_valence and len(r) < 3:
                raise BadGluing(f"vertex {r} has valence {len(r)} < 3")
            if len(r) < 1:
                raise BadGluing("empty vertex")
            for h in r:
                if h in seen:
                    raise BadGluing(f"half-edge {h} listed twice")
                seen.add(h)
        self.halves = seen
        self.vertex_of = {}
        self.sigma = {}
        for vi, r in enumerate(self.rotations):
            for k, h in enumerate(r):
                self.vertex_of[h] = vi
                self.sigma[h] = r[(k + 1) % len(r)]
        self.iota = {}
        for pair in pairing:
            a, b = pair
            if a == b:
                raise BadGluing(f"half-edge {a} paired with itself")
            if a not in seen or b not in seen:
                raise BadGluing(f"pairing names unknown half-edge in {pair}")
            if a in self.iota or b in self.iota:
                raise BadGluing(f"half-edge reused in pairing {pair}")
            self.iota[a] = b
            self.iota[b] = a
        if set(self.iota) != seen:
            raise BadGluing("pairing does not cover every half-edge")
        pairs = sorted(
            (tuple(sorted((a, b), key=repr)) for a, b in self.iota.items() if repr(a) < repr(b)),
            key=repr,
        )
        self.edges = pairs
        self.edge_of = {}
        for ei, (a, b) in enumerate(pairs):
            self.edge_of[a] = ei
            self.edge_of[b] = ei
        self.num_edges = len(pairs)

    @property
    def num_vertices(self):
        return len(self.rotations)

    def euler_characteristic(self):
        return self.num_vertices - self.num_edges

    def boundary_cycles(self):
        """Orbits of the face permutation h -> sigma(iota(h))."""
        out = []
        left = set(self.halves)
        for h0 in sorted(left, key=repr):
            if h0 not in left:
                continue
            cyc = []
            h = h0
            while True:
                cyc.append(h)
                left.discard(h)
                h = self.sigma[self.iota[h]]
                if h == h0:
                    break
            out.append(tuple(cyc))
        return out

    def genus(self):
        b = len(self.boundary_cycles())
        chi = self.euler_characteristic()
        g2 = 2 - chi - b
        if g2 % 2 or g2 < 0:
            raise BadGluing("inconsistent surface data")
        return g2 // 2

    def to_json_dict(self, weights=None):
        out = {
            "schema": "arclab/1",
            "rotations": [list(r) for r in self.rotations],
            "pairing": [list(p) for p in self.edges],
        }
        if weights is not None:
            out["weights"] = {str(e): weights[e] for e in sorted(weights)}
        return out

    @classmethod
    def from_json_dict(cls, obj, allow_low_valence=False):
        G = cls(obj["rotations"], obj["pairing"], allow_low_valence=allow_low_valence)
        w = None
        if "weights" in obj:
            w = {int(k): v for k, v in obj["weights"].items()}
        return G, w


def boundary_lengths(G, w):
    """Length of each boundary cycle: sum of edge weights per traversal."""
    for e, val in w.items():
        if val < 0:
            raise PreconditionViolated(f"negative weight on edge {e}")
    return [sum(w[G.edge_of[h]] for h in cyc) for cyc in G.boundary_cycles()]


def metric_positive(G, w):
    """Whether every boundary length is strictly positive."""
    return all(l > 0 for l in boundary_lengths(G, w))


def dual_fatgraph(T, stubs_for_boundary=True):
    """Poincare dual of an ideal triangulation.

    One trivalent vertex per triangle with the slot order as rotation, one
    edge per internal gluing.  Bordered triangulations get a univalent stub
    vertex per boundary slot (the documented bordered variant), which relaxes
    the valence rule.  Half-edge ids are the triangulation's slot ids, so
    dual edges and triangulation edges correspond through them.
    """
    rotations = [list(t) for t in T.triangles]
    pairing = [(a, b) for a, b in T.gluing.items() if a < b]
    boundary_slots = [T.edges[e][0] for e in T.boundary_edges]
    if boundary_slots and not stubs_for_boundary:
        raise BadGluing("bordered triangulation needs boundary stubs")
    low = False
    if boundary_slots:
        low = True
        nxt = max(s for s in T.slot_pos) + 1
        for s in sorted(boundary_slots):
            rotations.append([nxt])
            pairing.append((s, nxt))
            nxt += 1
    return Fatgraph(rotations, pairing, allow_low_valence=low)


def whitehead_move(G, e):
    """Contract edge e and re-expand with the other adjacent pairing.

    Defined here for edges joining two distinct trivalent vertices; the
    contraction of e makes a 4-valent vertex and the expansion splits it the
    other way.  On duals of triangulations this matches the diagonal flip.
    """
    h1, h2 = G.edges[e]
    v1, v2 = G.vertex_of[h1], G.vertex_of[h2]
    if v1 == v2:
        raise LoopEdge(f"edge {e} is a loop")
    r1, r2 = G.rotations[v1], G.rotations[v2]
    if len(r1) != 3 or len(r2) != 3:
        raise PreconditionViolated("move needs trivalent endpoints")
    i1, i2 = r1.index(h1), r2.index(h2)
    x, y = r1[(i1 + 1) % 3], r1[(i1 + 2) % 3]
    z, u = r2[(i2 + 1) % 3], r2[(i2 + 2) % 3]
    rotations = [list(r) for r in G.rotations]
    rotations[v1] = [h1, y, z]
    rotations[v2] = [h2, u, x]
    return Fatgraph(rotations, list(G.edges), allow_low_valence=True)


def fatgraph_key(G, weights=None):
    """Canonical key; equal keys exactly for isomorphic (weighted) fatgraphs.

    Disconnected graphs are keyed component by component, keys sorted.
    """
    comp_of = {}
    for h in sorted(G.halves, key=repr):
        if h in comp_of:
            continue
        cid = len(set(comp_of.values()))
        stack = [h]
        while stack:
            cur = stack.pop()
            if cur in comp_of:
                continue
            comp_of[cur] = cid
            stack.append(G.iota[cur])
            stack.extend(G.rotations[G.vertex_of[cur]])
    comps = {}
    for h, cid in comp_of.items():
        comps.setdefault(cid, []).append(h)
    keys = []
    for halves in comps.values():
        keys.append(min(_bfs_key(G, start, weights) for start in halves))
    return tuple(sorted(keys))


def _bfs_key(G, start, weights):
    new_id = {}
    vertex_seen = set()
    order = []
    flat = []

    def visit(h):
        vi = G.vertex_of[h]
        if vi in vertex_seen:
            return
        vertex_seen.add(vi)
        r = G.rotations[vi]
        k = r.index(h)
        rot = [r[(k + d) % len(r)] for d in range(len(r))]
        order.append(rot)
        for hh in rot:
            new_id[hh] = len(new_id)
            flat.append(hh)

    visit(start)
    qi = 0
    while qi < len(flat):
        visit(G.iota[flat[qi]])
        qi += 1
    codes = []
    for rot in order:
        codes.append(len(rot))
        for h in rot:
            codes.append(new_id[G.iota[h]])
    wcodes = ()
    if weights is not None:
        by_edge = {}
        for h, nid in new_id.items():
            e = G.edge_of[h]
            by_edge[e] = min(by_edge.get(e, nid), nid)
        wcodes = tuple(
            weights[e] for e, _ in sorted(by_edge.items(), key=lambda kv: kv[1])
        )
    return (len(order), tuple(codes), wcodes)


def subgraph_by_edges(G, edge_ids):
    """Restriction to an edge subset; half-edge ids kept, lone vertices drop."""
    keep_halves = {h for e in edge_ids for h in G.edges[e]}
    rotations = []
    for r in G.rotations:
        filtered = [h for h in r if h in keep_halves]
        if filtered:
            rotations.append(filtered)
    pairing = [G.edges[e] for e in sorted(edge_ids)]
    return Fatgraph(rotations, pairing, allow_low_valence=True)


def recurrent_decomposition(G, cap=16):
    """(recurrent edge ids, non-recurrent edge ids).

    An edge is recurrent when some closed walk passes through it with no
    immediate backtracking (consecutive edges distinct, cyclically) and no
    oriented edge repeated.  Exhaustive search; TooLarge beyond cap edges.
    """
    if G.num_edges > cap:
        raise TooLarge(f"{G.num_edges} edges exceeds cap {cap}")
    at_vertex = {}
    for h in G.halves:
        at_vertex.setdefault(G.vertex_of[h], []).append(h)
    for v in at_vertex:
        at_vertex[v].sort(key=repr)

    recurrent = set()

    def walk_from(h0):
        def dfs(last, used):
            arrive = G.vertex_of[G.iota[last]]
            for h2 in at_vertex[arrive]:
                if G.edge_of[h2] == G.edge_of[last]:
                    continue
                if h2 == h0:
                    return [h0]
                if h2 in used:
                    continue
                tail = dfs(h2, used | {h2})
                if tail is not None:
                    return [h2] + tail
            return None

        res = dfs(h0, {h0})
        if res is None:
            return None
        return [h0] + res[:-1]

    for e in range(G.num_edges):
        if e in recurrent:
            continue
        for h0 in G.edges[e]:
            walk = walk_from(h0)
            if walk is not None:
                recurrent.update(G.edge_of[h] for h in walk)
                break
    non = set(range(G.num_edges)) - recurrent
    return recurrent, non


def degeneration_harness(T, X_samples, limit_zero_edges=None, lam_threshold=1e3, config=None):
    """Empirical report on degenerating coordinate paths.

    X_samples lists edge-coordinate dicts approaching a limit.  The report
    records I (edges whose coordinate vanishes at the limit), J (edges whose
    recovered lambda diverges: above the threshold and growing over the last
    three samples), whether J is contained in I, and whether the recurrent
    part of the dual subgraph spanned by I equals the subgraph spanned by J.
    Solver failures propagate; nothing here asserts, it reports.
    """
    from . import solver as solver_mod
    from . import triangulation as tri_mod

    if not X_samples:
        raise PreconditionViolated("need at least one sample")
    last = X_samples[-1]
    if limit_zero_edges is None:
        I = {e for e, v in last.items() if abs(float(v)) < 1e-9}
    else:
        I = set(limit_zero_edges)
    flagged = [
        k
        for k, X in enumerate(X_samples)
        if not tri_mod.no_vanishing_cycle(T, X)
    ]
    lam_trace = []
    for X in X_samples:
        _, lam = solver_mod.solve_arithmetic_problem(T, X, config=config)
        lam_trace.append(lam)
    J = set()
    for e in range(T.num_edges):
        vals = [lam[e] for lam in lam_trace[-3:]]
        if vals[-1] > lam_threshold and all(a < b for a, b in zip(vals, vals[1:])):
            J.add(e)
    G = dual_fatgraph(T)
    dual_ids_I = [ei for ei, (a, b) in enumerate(G.edges) if T.edge_of_slot[a] in I]
    GI = subgraph_by_edges(G, dual_ids_I)
    R, _ = recurrent_decomposition(GI)
    R_T = {T.edge_of_slot[GI.edges[ei][0]] for ei in R}
    return {
        "I": sorted(I),
        "J": sorted(J),
        "J_subset_I": J <= I,
        "recurrent_part_of_I": sorted(R_T),
        "recurrent_matches_J": R_T == J,
        "flagged_no_vanishing": flagged,
        "final_lambda": lam_trace[-1],
    }
