"""Arc complexes of polygons and of punctured monogons.

Polygon side: vertices of the complex are the chords (i, j) of a convex n-gon
with labeled corners, stored as sorted pairs; a face is any pairwise
non-crossing chord set, so the complex is the flag complex of the
compatibility graph and its facets are the triangulations.  Punctured-monogon
side: cells are counted by tableaux, plane trees whose labels are proper
nonempty subsets with per-level disjointness and strict nesting along root
paths, plus one hand-built chain complex for the three-puncture case whose
cell letters follow the classical incidence table.
"""

import warnings
from dataclasses import dataclass
from itertools import combinations

from .errors import PreconditionViolated
from .homology import ChainComplexZ, IntMatrix, SimplicialComplex


def chords_cross(c, d):
    """Whether two sorted chord pairs of the same polygon cross.

    Strict interleaving only: shared endpoints do not cross.
    """
    (a, b), (p, q) = sorted(c), sorted(d)
    return a < p < b < q or p < a < q < b


def polygon_chords(n):
    """All chords (i, j), i < j, skipping the n polygon sides."""
    return [
        (i, j)
        for i in range(n)
        for j in range(i + 2, n)
        if not (i == 0 and j == n - 1)
    ]


def polygon_face_masks(n):
    """(chords, face bitmask set) for the n-gon arc complex.

    Faces are nonempty non-crossing chord subsets encoded as bitmasks over
    the chord list; the bitmask form keeps the link sweeps cheap.
    """
    if n < 4:
        raise PreconditionViolated("polygon arc complex needs n >= 4")
    chords = polygon_chords(n)
    m = len(chords)
    compat = [0] * m
    for i in range(m):
        for j in range(i + 1, m):
            if not chords_cross(chords[i], chords[j]):
                compat[i] |= 1 << j
                compat[j] |= 1 << i
    masks = set()

    def grow(mask, allowed):
        while allowed:
            low = allowed & -allowed
            allowed ^= low
            new = mask | low
            masks.add(new)
            grow(new, allowed & compat[low.bit_length() - 1])

    grow(0, (1 << m) - 1)
    return chords, masks


def polygon_arc_complex(n):
    """The simplicial complex of non-crossing chord families of the n-gon."""
    chords, masks = polygon_face_masks(n)
    faces = [_mask_to_face(mask, chords) for mask in masks]
    return SimplicialComplex(faces, assume_closed=True)


def _mask_to_face(mask, chords):
    out = []
    while mask:
        low = mask & -mask
        mask ^= low
        out.append(chords[low.bit_length() - 1])
    return frozenset(out)


def sphericity_report(n):
    """Homology-level sphere certification of the n-gon arc complex.

    Checks reduced homology of a sphere of dimension n-4, the pseudomanifold
    property, and that the link of every face has the homology of a sphere of
    the complementary dimension.  Returns a dict of findings.
    """
    chords, masks = polygon_face_masks(n)
    K = SimplicialComplex([_mask_to_face(m, chords) for m in masks], assume_closed=True)
    dim = n - 4
    report = {
        "n": n,
        "dim": dim,
        "f_vector": K.f_vector(),
        "euler_characteristic": K.euler_characteristic(),
        "is_sphere_homology": K.is_homology_sphere(dim),
        "is_pseudomanifold": K.is_pseudomanifold() if dim >= 1 else None,
        "links_ok": True,
        "bad_links": [],
    }
    mask_list = sorted(masks)
    for f in mask_list:
        cnt = bin(f).count("1")
        link_faces = [
            _mask_to_face(g, chords) for g in mask_list if not g & f and (g | f) in masks
        ]
        L = SimplicialComplex(link_faces, assume_closed=True)
        if not L.is_homology_sphere(dim - cnt):
            report["links_ok"] = False
            report["bad_links"].append(sorted(_mask_to_face(f, chords)))
    return report


def dimension_formula(g, r, s, deltas):
    """Dimension 6g - 7 + 3r + 2s + sum(deltas) of the arc complex.

    deltas lists the distinguished-point counts of the r boundary circles.
    The value is negative exactly for the triangle and the once-punctured
    monogon (both -1).
    """
    deltas = tuple(deltas)
    if r < 1 or len(deltas) != r:
        raise PreconditionViolated("need one delta per boundary component, r >= 1")
    if g < 0 or s < 0 or any(d < 0 for d in deltas):
        raise PreconditionViolated("negative surface data")
    return 6 * g - 7 + 3 * r + 2 * s + sum(deltas)


# -- tableaux ---------------------------------------------------------------------


@dataclass(frozen=True)
class Tableau:
    """Plane tree with subset labels; root label None.

    children are stored right to left, which makes the stored order the
    traversal order of pre_order.
    """

    label: object
    children: tuple = ()

    def edge_count(self):
        return len(self.children) + sum(c.edge_count() for c in self.children)

    def to_json(self):
        lab = None if self.label is None else sorted(self.label, key=repr)
        return {"label": lab, "children": [c.to_json() for c in self.children]}


def pre_order(t):
    """Vertex labels in pre-order: root, then each child subtree in turn."""
    out = [t.label]
    for c in t.children:
        out.extend(pre_order(c))
    return out


def enumerate_tableaux(S, max_edges):
    """All tableaux over label alphabet S with 1..max_edges edges.

    Returns {edge_count: [Tableau, ...]}.  Labels are proper nonempty subsets
    of S, disjoint within each level, strictly nested along root paths.  For
    |S| = 1 no labels exist at all; a RuntimeWarning flags the degenerate
    alphabet and every count is zero.
    """
    S = frozenset(S)
    if len(S) < 1:
        raise PreconditionViolated("label alphabet must be nonempty")
    if len(S) == 1:
        warnings.warn(
            "alphabet of size one admits no proper nonempty labels; no tableaux exist",
            RuntimeWarning,
            stacklevel=2,
        )
    out = {k: [] for k in range(1, max_edges + 1)}
    for forest, edges in _forests([None], max_edges, S):
        if edges:
            out[edges].append(Tableau(None, tuple(forest[0])))
    return out


def _proper_subsets(parent, S):
    base = sorted(S if parent is None else parent, key=repr)
    limit = len(S) if parent is None else len(parent)
    for k in range(1, limit):
        for c in combinations(base, k):
            yield frozenset(c)


def _label_rows(parents, S, budget):
    """Ordered child-label rows for one level, disjoint across the level."""

    def per_parent(idx, used, row, left):
        if idx == len(parents):
            yield row
            return
        for tail in tuples_for(parents[idx], used, left):
            yield from per_parent(
                idx + 1,
                used | frozenset().union(*tail) if tail else used,
                row + [tail],
                left - len(tail),
            )

    def tuples_for(parent, used, left):
        yield ()
        if left == 0:
            return
        for c in _proper_subsets(parent, S):
            if c & used:
                continue
            for rest in tuples_for(parent, used | c, left - 1):
                yield (c,) + rest

    yield from per_parent(0, frozenset(), [], budget)


def _forests(parent_labels, budget, S):
    """(forest, edge_count) pairs: forest[i] = subtrees below parent i."""
    for row in _label_rows(parent_labels, S, budget):
        flat = [lab for labs in row for lab in labs]
        k = len(flat)
        if k == 0:
            yield [[] for _ in parent_labels], 0
            continue
        for subforest, deeper in _forests(flat, budget - k, S):
            nodes = [Tableau(flat[j], tuple(subforest[j])) for j in range(k)]
            regrouped = []
            pos = 0
            for labs in row:
                regrouped.append(nodes[pos:pos + len(labs)])
                pos += len(labs)
            yield regrouped, k + deeper


# -- the three-puncture monogon chain complex --------------------------------------


def triply_punctured_monogon_complex():
    """Hand-built CW chain complex of the arc complex for three punctures.

    Returns (ChainComplexZ, cell name lists per dimension).  Cells follow the
    classical lettering: A_i, B_k in dimension 0; C_ij, D_ij, E_k, F_k in
    dimension 1; G_ij, H_ij, I_ij, J_ij in dimension 2; K_ij, L_ij in
    dimension 3, where ij ranges over ordered distinct pairs from {1,2,3} and
    k is the complementary index.
    """
    idx = (1, 2, 3)
    pairs = [(i, j) for i in idx for j in idx if i != j]

    def third(i, j):
        return next(k for k in idx if k not in (i, j))

    names = [[], [], [], []]
    names[0] = [f"A{i}" for i in idx] + [f"B{k}" for k in idx]
    names[1] = (
        [f"C{i}{j}" for i, j in pairs]
        + [f"D{i}{j}" for i, j in pairs]
        + [f"E{k}" for k in idx]
        + [f"F{k}" for k in idx]
    )
    names[2] = [f"{X}{i}{j}" for X in "GHIJ" for i, j in pairs]
    names[3] = [f"{X}{i}{j}" for X in "KL" for i, j in pairs]
    pos = [{nm: a for a, nm in enumerate(row)} for row in names]

    def matrix(k, relations):
        entries = {}
        for col, nm in enumerate(names[k]):
            for target, coeff in relations(nm):
                entries[(pos[k - 1][target], col)] = (
                    entries.get((pos[k - 1][target], col), 0) + coeff
                )
        return IntMatrix(len(names[k - 1]), len(names[k]), entries)

    def rel1(nm):
        kind, rest = nm[0], nm[1:]
        if kind == "C":
            i, j = map(int, rest)
            return [(f"A{i}", 1), (f"A{j}", -1)]
        if kind == "D":
            i, j = map(int, rest)
            return [(f"A{j}", 1), (f"B{third(i, j)}", -1)]
        if kind == "E":
            k = int(rest)
            return [(f"A{k}", 1), (f"B{k}", -1)]
        k = int(rest)  # F
        return [(f"B{k}", 1), (f"A{k}", -1)]

    def rel2(nm):
        kind, i, j = nm[0], int(nm[1]), int(nm[2])
        k = third(i, j)
        if kind == "G":
            return [(f"C{i}{j}", 1), (f"D{j}{i}", -1), (f"D{i}{j}", 1)]
        if kind == "H":
            return [(f"D{i}{j}", 1), (f"C{j}{k}", -1), (f"F{k}", 1)]
        if kind == "I":
            return [(f"D{i}{j}", 1), (f"E{k}", -1), (f"C{k}{j}", 1)]
        return [(f"C{i}{j}", 1), (f"C{i}{k}", -1), (f"C{j}{k}", 1)]  # J

    def rel3(nm):
        kind, i, j = nm[0], int(nm[1]), int(nm[2])
        k = third(i, j)
        if kind == "K":
            return [(f"G{i}{j}", 1), (f"H{i}{j}", -1), (f"H{j}{i}", 1), (f"J{i}{j}", -1)]
        return [(f"I{i}{j}", 1), (f"G{i}{j}", -1), (f"J{k}{i}", 1), (f"I{j}{i}", -1)]  # L

    dims = [len(row) for row in names]
    boundaries = [None, matrix(1, rel1), matrix(2, rel2), matrix(3, rel3)]
    return ChainComplexZ(dims, boundaries), names
