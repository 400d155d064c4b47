"""Weighted arc diagrams on bordered surfaces and their gluing.

A diagram has boundaries labeled 0..n, each carrying a marked point and a
cyclic sequence of arc ends listed from that marked point along the boundary
orientation.  Arcs carry positive rational widths.  Gluing output boundary i
of x to input boundary 0 of y scales y so the seam widths agree, refines the
bands over the common breakpoints, and discards any closed strands.  All
arithmetic is exact over Fraction, so unit, associativity, and equivariance
laws can be checked with equality rather than tolerance.
"""

import bisect
from dataclasses import dataclass
from fractions import Fraction

from .errors import NonPositiveWeight, NotExhaustive, PreconditionViolated


def _frac(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise PreconditionViolated(f"weight {v!r} is not exact")


class Diagram:
    """Weighted arc family: boundaries[b] lists (arc, end) from the marked point."""

    def __init__(self, boundaries, weights):
        self.weights = [_frac(w) for w in weights]
        for a, w in enumerate(self.weights):
            if w <= 0:
                raise NonPositiveWeight(f"arc {a} has weight {w}")
        self.boundaries = [tuple((a, e) for a, e in bl) for bl in boundaries]
        if not self.boundaries:
            raise PreconditionViolated("need at least the output boundary")
        need = {(a, e) for a in range(len(self.weights)) for e in (0, 1)}
        got = [s for bl in self.boundaries for s in bl]
        if len(got) != len(set(got)) or set(got) != need:
            raise PreconditionViolated("arc ends and boundary slots disagree")
        for b, bl in enumerate(self.boundaries):
            if not bl:
                raise NotExhaustive(f"boundary {b} meets no arc")
        self.slot_pos = {}
        for b, bl in enumerate(self.boundaries):
            for k, s in enumerate(bl):
                self.slot_pos[s] = (b, k)

    @property
    def num_inputs(self):
        return len(self.boundaries) - 1

    @property
    def num_arcs(self):
        return len(self.weights)

    def boundary_weight(self, b):
        return sum(self.weights[a] for a, _ in self.boundaries[b])

    def total_weight(self):
        return sum(self.weights)

    def to_json_dict(self):
        slot_id = {}
        bl_out = []
        for bl in self.boundaries:
            row = []
            for s in bl:
                slot_id[s] = len(slot_id)
                row.append(slot_id[s])
            bl_out.append(row)
        arcs = []
        for a, w in enumerate(self.weights):
            arcs.append([slot_id[(a, 0)], slot_id[(a, 1)], w.numerator, w.denominator])
        return {"schema": "arclab/1", "boundaries": bl_out, "arcs": arcs}

    @classmethod
    def from_json_dict(cls, obj):
        pos_of = {}
        for b, row in enumerate(obj["boundaries"]):
            for k, sid in enumerate(row):
                if sid in pos_of:
                    raise PreconditionViolated(f"slot {sid} listed twice")
                pos_of[sid] = (b, k)
        slots = {}
        weights = []
        for a, rec in enumerate(obj["arcs"]):
            s0, s1, num, den = rec
            weights.append(Fraction(num, den))
            slots[pos_of[s0]] = (a, 0)
            slots[pos_of[s1]] = (a, 1)
        boundaries = []
        for b, row in enumerate(obj["boundaries"]):
            boundaries.append([slots[(b, k)] for k in range(len(row))])
        return cls(boundaries, weights)


@dataclass
class GlueResult:
    diagram: Diagram
    discarded_annuli: int
    discarded_weight: Fraction
    seam_total: Fraction
    seam_arc_flux: Fraction
    seam_annulus_flux: Fraction


def glue(x, i, y):
    """Compose y into input boundary i of x.

    The seam identifies x's boundary i with y's boundary 0 reversing
    orientation, marked points aligned; y is scaled so the seam widths agree.
    Band strands are chained across the seam; chains ending on free
    boundaries become arcs of the composite, closed chains are dropped and
    reported.  Result boundaries: x's below i, then y's inputs, then x's
    above i.
    """
    if not 1 <= i <= x.num_inputs:
        raise PreconditionViolated(f"input index {i} out of range")
    Wx = x.boundary_weight(i)
    factor = Wx / y.boundary_weight(0)
    yw = [w * factor for w in y.weights]
    xw = x.weights
    W = Wx

    x_slots = x.boundaries[i]
    c = [Fraction(0)]
    for a, _ in x_slots:
        c.append(c[-1] + xw[a])
    y_slots = y.boundaries[0]
    d = [Fraction(0)]
    for a, _ in y_slots:
        d.append(d[-1] + yw[a])

    x_iv = [(c[k], x_slots[k][0], x_slots[k][1]) for k in range(len(x_slots))]
    y_iv = sorted(
        (W - d[m + 1], y_slots[m][0], y_slots[m][1]) for m in range(len(y_slots))
    )
    pos = {}
    for start, a, e in x_iv:
        pos[("x", a, e)] = start
    for start, a, e in y_iv:
        pos[("y", a, e)] = start
    width = {"x": xw, "y": yw}

    # common refinement, closed under through-band transport (reflections)
    B = {Fraction(0), W}
    B.update(s for s, _, _ in x_iv)
    B.update(s for s, _, _ in y_iv)
    refl = []
    for side in ("x", "y"):
        for a in range(len(width[side])):
            if (side, a, 0) in pos and (side, a, 1) in pos:
                p0, p1 = pos[(side, a, 0)], pos[(side, a, 1)]
                refl.append((p0, p1, width[side][a]))
    changed = True
    while changed:
        changed = False
        for p0, p1, w in refl:
            C = p0 + p1 + w
            for u in list(B):
                if p0 < u < p0 + w or p1 < u < p1 + w:
                    v = C - u
                    if v not in B:
                        B.add(v)
                        changed = True
    cuts = sorted(B)

    # pieces of every arc, in end-0 local coordinates
    pieces = {}
    for side in ("x", "y"):
        for a in range(len(width[side])):
            w = width[side][a]
            cutset = {Fraction(0), w}
            for e in (0, 1):
                key = (side, a, e)
                if key in pos:
                    p = pos[key]
                    loc = (u - p for u in cuts if p < u < p + w)
                    cutset.update(t if e == 0 else w - t for t in loc)
            ls = sorted(cutset)
            pieces[(side, a)] = [(ls[t], ls[t + 1]) for t in range(len(ls) - 1)]
    pidx = {
        key: {s: t for t, (s, _) in enumerate(ps)} for key, ps in pieces.items()
    }

    x_starts = [s for s, _, _ in x_iv]
    y_starts = [s for s, _, _ in y_iv]

    def resolve(side, ivs, starts, u0, u1):
        k = bisect.bisect_right(starts, u0) - 1
        p, a, e = ivs[k]
        w = width[side][a]
        s = u0 - p if e == 0 else w - (u1 - p)
        return (side, a, pidx[(side, a)][s], e)

    seam_link = {}
    cells = []
    for t in range(len(cuts) - 1):
        u0, u1 = cuts[t], cuts[t + 1]
        mx = resolve("x", x_iv, x_starts, u0, u1)
        my = resolve("y", y_iv, y_starts, u0, u1)
        seam_link[mx] = my
        seam_link[my] = mx
        cells.append((u1 - u0, mx, my))

    # chain the strands
    def free(mini):
        side, a, _, e = mini
        return (side, a, e) not in pos

    all_minis = []
    for (side, a), ps in sorted(pieces.items()):
        for t in range(len(ps)):
            for e in (0, 1):
                all_minis.append((side, a, t, e))
    chain_of = {}
    endpoint_of = {}
    new_weights = []
    n_annuli = 0
    annulus_weight = Fraction(0)
    for start in all_minis:
        if not free(start) or start in chain_of:
            continue
        aid = len(new_weights)
        side, a, t, e = start
        seg = pieces[(side, a)][t]
        new_weights.append(seg[1] - seg[0])
        endpoint_of[start] = (aid, 0)
        cur = start
        while True:
            side, a, t, e = cur
            chain_of[cur] = aid
            far = (side, a, t, 1 - e)
            chain_of[far] = aid
            if free(far):
                endpoint_of[far] = (aid, 1)
                break
            cur = seam_link[far]
    for start in all_minis:
        if start in chain_of:
            continue
        cid = ("ann", n_annuli)
        n_annuli += 1
        side, a, t, e = start
        seg = pieces[(side, a)][t]
        annulus_weight += seg[1] - seg[0]
        cur = start
        while cur not in chain_of:
            side, a, t, e = cur
            chain_of[cur] = cid
            far = (side, a, t, 1 - e)
            chain_of[far] = cid
            cur = seam_link[far]

    arc_flux = Fraction(0)
    ann_flux = Fraction(0)
    for w, mx, _ in cells:
        if isinstance(chain_of[mx], int):
            arc_flux += w
        else:
            ann_flux += w

    def expand(side, bl):
        # stored piece coords follow the arc's end-0 local frame on the x
        # side but the end-1 frame on the y side (the seam map reverses
        # orientation), so the refinement order flips accordingly
        out = []
        for a, e in bl:
            ps = pieces[(side, a)]
            ascending = (e == 0) == (side == "x")
            rng = range(len(ps)) if ascending else reversed(range(len(ps)))
            out.extend(endpoint_of[(side, a, t, e)] for t in rng)
        return out

    boundaries = []
    for b in range(0, i):
        boundaries.append(expand("x", x.boundaries[b]))
    for b in range(1, y.num_inputs + 1):
        boundaries.append(expand("y", y.boundaries[b]))
    for b in range(i + 1, x.num_inputs + 1):
        boundaries.append(expand("x", x.boundaries[b]))

    return GlueResult(
        diagram=Diagram(boundaries, new_weights),
        discarded_annuli=n_annuli,
        discarded_weight=annulus_weight,
        seam_total=W,
        seam_arc_flux=arc_flux,
        seam_annulus_flux=ann_flux,
    )


def _find_parallel(d):
    """A mergeable pair (a1, a2), or None.

    Two arcs are parallel when an end of each sits in consecutive slots of
    one boundary and the two far ends sit in consecutive slots the other way
    around, with neither gap containing a marked point (list wraparound).
    """
    for bl in d.boundaries:
        for k in range(len(bl) - 1):
            a1, e1 = bl[k]
            a2, e2 = bl[k + 1]
            if a1 == a2:
                continue
            b2, k2 = d.slot_pos[(a2, 1 - e2)]
            far = d.boundaries[b2]
            if k2 + 1 < len(far) and far[k2 + 1] == (a1, 1 - e1):
                return (a1, a2)
    return None


def _merge_pair(d, a1, a2):
    w = list(d.weights)
    w[a1] = w[a1] + w[a2]
    del w[a2]

    def relab(s):
        a, e = s
        if a == a2:
            return None
        return (a - 1, e) if a > a2 else (a, e)

    boundaries = []
    for bl in d.boundaries:
        boundaries.append([t for t in map(relab, bl) if t is not None])
    return Diagram(boundaries, w)


def canonical_form(d):
    """Merge parallel arcs, scale total weight to 1, renumber by first use."""
    cur = d
    while True:
        hit = _find_parallel(cur)
        if hit is None:
            break
        cur = _merge_pair(cur, *hit)
    tot = cur.total_weight()
    weights = [w / tot for w in cur.weights]
    order = {}
    flip = {}
    for bl in cur.boundaries:
        for a, e in bl:
            if a not in order:
                order[a] = len(order)
                flip[a] = e
    boundaries = [
        [(order[a], e ^ flip[a]) for a, e in bl] for bl in cur.boundaries
    ]
    new_w = [None] * len(weights)
    for a, na in order.items():
        new_w[na] = weights[a]
    return Diagram(boundaries, new_w)


def canonical_key(d):
    c = canonical_form(d)
    return (
        tuple(tuple(bl) for bl in c.boundaries),
        tuple((w.numerator, w.denominator) for w in c.weights),
    )


def diagrams_equal(x, y):
    """Equality of projective classes (canonical forms agree)."""
    return canonical_key(x) == canonical_key(y)


def relabel(d, perm):
    """Permute input boundary labels; perm maps old label to new, fixing 0."""
    n = d.num_inputs
    p = dict(perm)
    if sorted(p) != list(range(1, n + 1)) or sorted(p.values()) != list(range(1, n + 1)):
        raise PreconditionViolated("not a permutation of the input labels")
    boundaries = [None] * (n + 1)
    boundaries[0] = list(d.boundaries[0])
    for j in range(1, n + 1):
        boundaries[p[j]] = list(d.boundaries[j])
    return Diagram(boundaries, d.weights)


def composite_label(j, i, n_y):
    """Label of x's input j inside x composed at input i."""
    return j if j < i else j + n_y - 1


def equivariance_check(x, i, y, sigma_x=None, sigma_y=None):
    """Gluing commutes with relabeling on either factor.

    sigma_x permutes x's inputs and must fix i; sigma_y permutes y's inputs.
    Returns True when every requested identity holds on canonical forms.
    """
    n_x, n_y = x.num_inputs, y.num_inputs
    base = glue(x, i, y).diagram
    ok = True
    if sigma_y is not None:
        lhs = glue(x, i, relabel(y, sigma_y)).diagram
        comp = {composite_label(j, i, n_y): composite_label(j, i, n_y) for j in range(1, n_x + 1) if j != i}
        for m in range(1, n_y + 1):
            comp[i - 1 + m] = i - 1 + sigma_y[m]
        ok = ok and diagrams_equal(lhs, relabel(base, comp))
    if sigma_x is not None:
        if sigma_x.get(i, i) != i:
            raise PreconditionViolated("sigma_x must fix the glued input")
        lhs = glue(relabel(x, sigma_x), i, y).diagram
        comp = {i - 1 + m: i - 1 + m for m in range(1, n_y + 1)}
        for j in range(1, n_x + 1):
            if j != i:
                comp[composite_label(j, i, n_y)] = composite_label(sigma_x[j], i, n_y)
        ok = ok and diagrams_equal(lhs, relabel(base, comp))
    return ok


def associativity_check(a, i, b, j, c):
    """(a o_i b) o_{i-1+j} c against a o_i (b o_j c), canonical equality."""
    lhs = glue(glue(a, i, b).diagram, i - 1 + j, c).diagram
    rhs = glue(a, i, glue(b, j, c).diagram).diagram
    return diagrams_equal(lhs, rhs)


def parallel_composition_check(a, i, b, j, c):
    """Disjoint-slot exchange: compose at i and j > i in either order."""
    if not i < j:
        raise PreconditionViolated("need i < j")
    n_b = b.num_inputs
    lhs = glue(glue(a, i, b).diagram, j + n_b - 1, c).diagram
    rhs = glue(glue(a, j, c).diagram, i, b).diagram
    return diagrams_equal(lhs, rhs)


def topological_type(d):
    """(genus, boundary count) of the smallest surface carrying the diagram.

    Thicken boundaries and bands, then cap every free boundary curve of the
    thickening; free curves are the orbits of the gap-to-band traversal.
    """
    cyc = 0
    seen = set()
    for s0 in d.slot_pos:
        if s0 in seen:
            continue
        s = s0
        while s not in seen:
            seen.add(s)
            b, k = d.slot_pos[s]
            bl = d.boundaries[b]
            a, e = bl[(k + 1) % len(bl)]
            s = (a, 1 - e)
        cyc += 1
    chi = -d.num_arcs + cyc
    b = len(d.boundaries)
    g2 = 2 - b - chi
    if g2 % 2 or g2 < 0:
        raise PreconditionViolated("inconsistent traversal")
    return (g2 // 2, b)


def identity_diagram():
    """Annulus with a single band of weight one."""
    return Diagram([[(0, 0)], [(0, 1)]], [Fraction(1)])


def bv_diagram():
    """Twist family representative on the annulus at parameter one half."""
    h = Fraction(1, 2)
    return Diagram([[(0, 0), (1, 0)], [(0, 1), (1, 1)]], [h, h])


def dot_diagram():
    """Pair of pants, each input joined to the output."""
    h = Fraction(1, 2)
    return Diagram([[(0, 0), (1, 0)], [(0, 1)], [(1, 1)]], [h, h])


def star_diagram():
    """Pair of pants with the extra band joining the two inputs."""
    q = Fraction(1, 4)
    return Diagram(
        [[(0, 0), (1, 0)], [(0, 1), (2, 0)], [(2, 1), (1, 1)]],
        [q, q, Fraction(1, 2)],
    )


NAMED_DIAGRAMS = {
    "identity": identity_diagram,
    "bv": bv_diagram,
    "dot": dot_diagram,
    "star": star_diagram,
}
