"""Integer homology of simplicial and cellular chain complexes.

Boundary matrices are sparse integer matrices.  Ranks and torsion come from a
two-stage Smith reduction: unit (+-1) pivots are eliminated sparsely with a
fill-minimizing choice, and whatever core remains goes through a dense Smith
normal form over Python ints, so no overflow is possible.  Simplicial
complexes store all nonempty faces downward-closed; the empty face is
implicit, surfacing only through reduced homology and links of facets.
"""

from dataclasses import dataclass

from .errors import EmptyComplex, FaceAbsent


class IntMatrix:
    """Sparse integer matrix: shape plus a dict of nonzero entries."""

    def __init__(self, nrows, ncols, entries=None):
        self.nrows = nrows
        self.ncols = ncols
        self.entries = {}
        if entries:
            for (i, j), v in entries.items():
                if v:
                    self.entries[(i, j)] = int(v)

    def __matmul__(self, other):
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        by_row = {}
        for (i, j), v in other.entries.items():
            by_row.setdefault(i, []).append((j, v))
        out = {}
        for (i, k), v in self.entries.items():
            for (j, w) in by_row.get(k, ()):
                out[(i, j)] = out.get((i, j), 0) + v * w
        return IntMatrix(self.nrows, other.ncols, out)

    def is_zero(self):
        return not any(self.entries.values())

    def transpose(self):
        return IntMatrix(self.ncols, self.nrows, {(j, i): v for (i, j), v in self.entries.items()})


def smith_rank_torsion(mat):
    """(rank, invariant factors > 1) of an IntMatrix."""
    rows = {}
    cols = {}
    for (i, j), v in mat.entries.items():
        rows.setdefault(i, {})[j] = v
        cols.setdefault(j, set()).add(i)
    rank = 0
    while True:
        # cheapest unit pivot: shortest row holding a +-1, then its thinnest column
        best_row = None
        best_len = None
        for i, r in rows.items():
            if best_len is not None and len(r) >= best_len:
                continue
            if any(v in (1, -1) for v in r.values()):
                best_row, best_len = i, len(r)
                if best_len == 1:
                    break
        if best_row is None:
            break
        i0 = best_row
        j0, v0 = min(
            ((j, v) for j, v in rows[i0].items() if v in (1, -1)),
            key=lambda jv: len(cols[jv[0]]),
        )
        prow = dict(rows[i0])
        for i in list(cols[j0]):
            if i == i0:
                continue
            f = rows[i][j0] * v0  # multiplier so that column j0 cancels
            for j, v in prow.items():
                cur = rows[i].get(j, 0) - f * v
                if cur:
                    rows[i][j] = cur
                    cols.setdefault(j, set()).add(i)
                else:
                    rows[i].pop(j, None)
                    cs = cols.get(j)
                    if cs:
                        cs.discard(i)
                        if not cs:
                            cols.pop(j, None)
            if not rows[i]:
                rows.pop(i, None)
        for j in list(prow):
            cs = cols.get(j)
            if cs:
                cs.discard(i0)
                if not cs:
                    cols.pop(j, None)
        rows.pop(i0, None)
        rank += 1
    if not rows:
        return rank, ()
    row_ids = sorted(rows)
    col_ids = sorted({j for r in rows.values() for j in r})
    jpos = {j: a for a, j in enumerate(col_ids)}
    core = [[0] * len(col_ids) for _ in row_ids]
    for a, i in enumerate(row_ids):
        for j, v in rows[i].items():
            core[a][jpos[j]] = v
    factors = _dense_smith(core)
    rank += sum(1 for d in factors if d != 0)
    torsion = tuple(d for d in factors if d > 1)
    return rank, torsion


def _dense_smith(a):
    """Invariant factors of a dense integer matrix (list of lists)."""
    a = [row[:] for row in a]
    m = len(a)
    n = len(a[0]) if m else 0
    factors = []
    top = 0
    while top < min(m, n):
        # find the smallest nonzero entry in the remaining block
        piv = None
        for i in range(top, m):
            for j in range(top, n):
                if a[i][j] and (piv is None or abs(a[i][j]) < abs(a[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        i0, j0 = piv
        a[top], a[i0] = a[i0], a[top]
        for row in a:
            row[top], row[j0] = row[j0], row[top]
        changed = True
        while changed:
            changed = False
            p = a[top][top]
            for i in range(top + 1, m):
                if a[i][top]:
                    q = a[i][top] // p
                    for j in range(top, n):
                        a[i][j] -= q * a[top][j]
                    if a[i][top]:
                        a[top], a[i] = a[i], a[top]
                        changed = True
                        break
            if changed:
                continue
            for j in range(top + 1, n):
                if a[top][j]:
                    q = a[top][j] // p
                    for i in range(top, m):
                        a[i][j] -= q * a[i][top]
                    if a[top][j]:
                        for i in range(top, m):
                            a[i][top], a[i][j] = a[i][j], a[i][top]
                        changed = True
                        break
        # divisibility: fold any non-multiple into the pivot position
        p = a[top][top]
        fixed = False
        while not fixed:
            fixed = True
            for i in range(top + 1, m):
                for j in range(top + 1, n):
                    if a[i][j] % p:
                        for jj in range(top, n):
                            a[top][jj] += a[i][jj]
                        fixed = False
                        break
                if not fixed:
                    break
            if not fixed:
                # re-reduce the enlarged row
                changed = True
                while changed:
                    changed = False
                    p = a[top][top]
                    for i in range(top + 1, m):
                        if a[i][top]:
                            q = a[i][top] // p
                            for j in range(top, n):
                                a[i][j] -= q * a[top][j]
                            if a[i][top]:
                                a[top], a[i] = a[i], a[top]
                                changed = True
                                break
                    if changed:
                        continue
                    for j in range(top + 1, n):
                        if a[top][j]:
                            q = a[top][j] // p
                            for i in range(top, m):
                                a[i][j] -= q * a[i][top]
                            if a[top][j]:
                                for i in range(top, m):
                                    a[i][top], a[i][j] = a[i][j], a[i][top]
                                changed = True
                                break
                p = a[top][top]
        factors.append(abs(p))
        top += 1
    return factors


@dataclass(frozen=True)
class HomologyGroup:
    betti: int
    torsion: tuple = ()

    def is_trivial(self):
        return self.betti == 0 and not self.torsion

    def is_free_of_rank(self, r):
        return self.betti == r and not self.torsion

    def __str__(self):
        parts = ["Z"] * self.betti + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


class ChainComplexZ:
    """Finitely generated chain complex of free abelian groups.

    dims[k] is the rank of C_k; boundaries[k] maps C_k -> C_{k-1} for
    k >= 1 (index 0 unused).
    """

    def __init__(self, dims, boundaries):
        self.dims = list(dims)
        self.boundaries = list(boundaries)

    def check_boundaries(self):
        """True iff consecutive boundary maps compose to zero."""
        for k in range(2, len(self.dims)):
            if not (self.boundaries[k - 1] @ self.boundaries[k]).is_zero():
                return False
        return True

    def homology(self):
        top = len(self.dims) - 1
        ranks = [0] * (top + 2)
        torsions = [()] * (top + 2)
        for k in range(1, top + 1):
            ranks[k], torsions[k] = smith_rank_torsion(self.boundaries[k])
        out = []
        for k in range(top + 1):
            betti = self.dims[k] - ranks[k] - ranks[k + 1]
            out.append(HomologyGroup(betti, torsions[k + 1]))
        return out


def _vkey(v):
    return (v.__class__.__name__, repr(v))


class SimplicialComplex:
    """Abstract simplicial complex over hashable vertices.

    assume_closed skips the downward closure for inputs that already list
    every nonempty face (the arc-complex enumerations do).
    """

    def __init__(self, faces, assume_closed=False):
        self.faces = set()
        if assume_closed:
            self.faces = {frozenset(f) for f in faces if f}
        else:
            for f in faces:
                f = frozenset(f)
                if not f:
                    continue
                for sub in _downward(f):
                    self.faces.add(sub)
        self.vertices = sorted({v for f in self.faces for v in f}, key=_vkey)
        self._by_dim = {}
        for f in self.faces:
            self._by_dim.setdefault(len(f) - 1, []).append(f)
        for k in self._by_dim:
            self._by_dim[k].sort(key=lambda f: sorted(map(_vkey, f)))

    @property
    def dim(self):
        return max(self._by_dim) if self._by_dim else -1

    def faces_of_dim(self, k):
        return list(self._by_dim.get(k, ()))

    def f_vector(self):
        return tuple(len(self._by_dim.get(k, ())) for k in range(self.dim + 1))

    def euler_characteristic(self):
        return sum((-1) ** k * len(fs) for k, fs in self._by_dim.items())

    def has_face(self, f):
        return frozenset(f) in self.faces

    def boundary_matrix(self, k):
        """Boundary map C_k -> C_{k-1} with vertex order fixed by _vkey."""
        rows = self.faces_of_dim(k - 1)
        cols = self.faces_of_dim(k)
        rindex = {f: i for i, f in enumerate(rows)}
        entries = {}
        for j, f in enumerate(cols):
            vs = sorted(f, key=_vkey)
            for i, v in enumerate(vs):
                sub = frozenset(vs[:i] + vs[i + 1:])
                if sub:
                    entries[(rindex[sub], j)] = (-1) ** i
        return IntMatrix(len(rows), len(cols), entries)

    def chain_complex(self):
        d = self.dim
        dims = [len(self.faces_of_dim(k)) for k in range(d + 1)]
        boundaries = [None] + [self.boundary_matrix(k) for k in range(1, d + 1)]
        return ChainComplexZ(dims, boundaries)

    def homology(self, reduced=False):
        """Homology groups as {degree: HomologyGroup}.

        The empty complex has reduced homology Z in degree -1 and nothing
        else; with reduced=True the degree-0 betti number drops by the count
        of components minus one in the usual way.
        """
        if not self.faces:
            return {-1: HomologyGroup(1)} if reduced else {}
        groups = self.chain_complex().homology()
        out = {k: g for k, g in enumerate(groups)}
        if reduced:
            g0 = out[0]
            out[0] = HomologyGroup(g0.betti - 1, g0.torsion)
            out[-1] = HomologyGroup(0)
        return out

    def is_homology_sphere(self, d=None):
        """Reduced homology matches the d-sphere (default d = dim)."""
        if d is None:
            d = self.dim
        h = self.homology(reduced=True)
        for k, g in h.items():
            want = 1 if k == d else 0
            if not g.is_free_of_rank(want):
                return False
        return h.get(d, HomologyGroup(0)).is_free_of_rank(1) if d >= 0 else not self.faces

    def link(self, face):
        """Link of a face: all g disjoint from it with g union face a face."""
        f = frozenset(face)
        if f and f not in self.faces:
            raise FaceAbsent(f"face {sorted(map(repr, f))} not in the complex")
        out = []
        for g in self.faces:
            if not (g & f) and (g | f) in self.faces:
                out.append(g)
        return SimplicialComplex(out)

    def is_pure(self):
        d = self.dim
        facets = [f for f in self.faces if not any(f < g for g in self.faces)]
        return all(len(f) - 1 == d for f in facets)

    def is_pseudomanifold(self):
        """Pure, every ridge in exactly two facets, strongly connected."""
        d = self.dim
        if d == 0:
            # the empty ridge must lie in exactly two facets
            return self.is_pure() and len(self.faces_of_dim(0)) == 2
        if d < 1 or not self.is_pure():
            return False
        facets = self.faces_of_dim(d)
        ridge_count = {}
        for f in facets:
            for v in f:
                ridge_count.setdefault(f - {v}, []).append(f)
        if any(len(fs) != 2 for fs in ridge_count.values()):
            return False
        adj = {f: [] for f in facets}
        for fs in ridge_count.values():
            a, b = fs
            adj[a].append(b)
            adj[b].append(a)
        seen = {facets[0]}
        queue = [facets[0]]
        while queue:
            f = queue.pop()
            for g in adj[f]:
                if g not in seen:
                    seen.add(g)
                    queue.append(g)
        return len(seen) == len(facets)

    def suspension(self):
        """Join with two fresh cone points; raises EmptyComplex on nothing."""
        if not self.faces:
            raise EmptyComplex("cannot suspend an empty complex")
        north, south = ("susp", 0), ("susp", 1)
        existing = set(self.vertices)
        while north in existing or south in existing:
            north, south = (north,), (south,)
        out = list(self.faces)
        out.append(frozenset([north]))
        out.append(frozenset([south]))
        for f in self.faces:
            out.append(f | {north})
            out.append(f | {south})
        return SimplicialComplex(out)


def _downward(f):
    out = [f]
    seen = {f}
    stack = [f]
    while stack:
        g = stack.pop()
        if len(g) > 1:
            for v in g:
                sub = g - {v}
                if sub not in seen:
                    seen.add(sub)
                    out.append(sub)
                    stack.append(sub)
    return out
