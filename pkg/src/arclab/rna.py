"""Backbone bonding structures and the surfaces they span.

Sites live at integer positions 0..m on a backbone segment.  Bonds join
sites at least two apart.  Thickening the backbone to a strip and each bond
to a band gives a surface F' with chi = 1 - |bonds|; its genus separates
secondary structures (planar, g = 0) from pseudoknotted ones.  Bonds attach
to the strip's upper side (chiral model) or to a chosen side per bond
(achiral model).
"""

from dataclasses import dataclass

from . import fatgraph as fg
from .errors import (
    NotBinary,
    NotSecondary,
    PreconditionViolated,
    TooLarge,
)


class Bonding:
    """A set of bonds over sites 0..m; bond ends at least two sites apart."""

    def __init__(self, m, bonds):
        if m < 0:
            raise PreconditionViolated("backbone length must be nonnegative")
        self.m = m
        norm = set()
        for bond in bonds:
            i, j = sorted(bond)
            if i == j or not (0 <= i and j <= m):
                raise PreconditionViolated(f"bond {{{i},{j}}} leaves the backbone")
            if j - i < 2:
                raise PreconditionViolated(f"bond {{{i},{j}}} joins near neighbors")
            norm.add((i, j))
        self.bonds = tuple(sorted(norm))

    def degree(self, site):
        return sum(1 for i, j in self.bonds if site in (i, j))

    def degrees(self):
        out = [0] * (self.m + 1)
        for i, j in self.bonds:
            out[i] += 1
            out[j] += 1
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Bonding)
            and self.m == other.m
            and self.bonds == other.bonds
        )

    def __hash__(self):
        return hash((self.m, self.bonds))

    def __repr__(self):
        return f"Bonding(m={self.m}, bonds={list(self.bonds)})"


def bonds_cross(b1, b2):
    """Strict interleaving of endpoint pairs."""
    (i, j), (p, q) = sorted(b1), sorted(b2)
    return i < p < j < q or p < i < q < j


def is_secondary_structure(B):
    bonds = B.bonds
    return not any(
        bonds_cross(bonds[s], bonds[t])
        for s in range(len(bonds))
        for t in range(s + 1, len(bonds))
    )


def is_binary(B):
    """Every site bonded at most once; only defined for secondary structures."""
    if not is_secondary_structure(B):
        raise NotSecondary("crossing bonds present")
    return all(d <= 1 for d in B.degrees())


def helices(B):
    """Maximal runs of bonds nested one site inward at each step."""
    present = set(B.bonds)
    out = []
    for i, j in B.bonds:
        if (i - 1, j + 1) in present:
            continue
        run = [(i, j)]
        while (run[-1][0] + 1, run[-1][1] - 1) in present:
            run.append((run[-1][0] + 1, run[-1][1] - 1))
        out.append(run)
    return out


def binary_reduction(B):
    """Split multiply-bonded sites into runs of copies, one bond each.

    Outer bonds land on outer copies so the result stays secondary.  Returns
    the reduced bonding and the site map (old site -> list of new sites).
    """
    if not is_secondary_structure(B):
        raise NotSecondary("crossing bonds present")
    degs = B.degrees()
    copies = [max(d, 1) for d in degs]
    offset = [0] * (B.m + 2)
    for s in range(B.m + 1):
        offset[s + 1] = offset[s] + copies[s]
    site_map = {s: list(range(offset[s], offset[s + 1])) for s in range(B.m + 1)}

    # per site: left bonds innermost-first on the early copies, then right
    # bonds outermost-first; this is the unique non-crossing assignment
    assign = {}
    for s in range(B.m + 1):
        left = sorted((i, j) for i, j in B.bonds if j == s)
        right = sorted(((i, j) for i, j in B.bonds if i == s), key=lambda b: -b[1])
        lane = 0
        for bond in reversed(left):
            assign[(bond, s)] = offset[s] + lane
            lane += 1
        for bond in right:
            assign[(bond, s)] = offset[s] + lane
            lane += 1
    new_bonds = {
        (assign[(b, b[0])], assign[(b, b[1])]) for b in B.bonds
    }
    return Bonding(offset[B.m + 1] - 1, new_bonds), site_map


@dataclass
class FoldSurfaceReport:
    boundary_count: int
    euler_characteristic: int
    genus: int
    capped_count: int
    pseudoknot_cycles: list

    @property
    def capped_boundary_count(self):
        return self.boundary_count - self.capped_count

    @property
    def num_pseudoknots(self):
        return len(self.pseudoknot_cycles)

    def to_json_dict(self):
        return {
            "schema": "arclab/1",
            "b": self.boundary_count,
            "chi": self.euler_characteristic,
            "g": self.genus,
            "capped": self.capped_count,
            "pseudoknots": [
                [list(b) for b in cyc] for cyc in self.pseudoknot_cycles
            ],
        }


def _foot_key(m, site, side):
    # strip boundary order: upper side left to right, then the right cap,
    # then the lower side right to left, then the left cap (the wrap)
    return (site, 0) if side == "a" else (2 * m - site, 1)


def _fold_surface(m, sided):
    if len({s for bond in sided for s in bond[:2]}) != 2 * len(sided):
        raise NotBinary("some site carries more than one bond")
    n = len(sided)
    if n == 0:
        return FoldSurfaceReport(1, 1, 0, 0, [])
    feet = []
    for t, (i, j, side) in enumerate(sided):
        feet.append((_foot_key(m, i, side), (t, 0)))
        feet.append((_foot_key(m, j, side), (t, 1)))
    feet.sort()
    rotation = [h for _, h in feet]
    pairing = [((t, 0), (t, 1)) for t in range(n)]
    G = fg.Fatgraph([rotation], pairing, allow_low_valence=True)
    cycles = G.boundary_cycles()
    b = len(cycles)
    chi = 1 - n
    if (1 + n - b) % 2:
        raise PreconditionViolated("parity broke; invalid surface data")
    g = (1 + n - b) // 2

    pos_in_rot = {h: k for k, (_, h) in enumerate(feet)}
    keys = [key for key, _ in feet]

    def gap_hits_endpoint(k):
        # gap following foot k (cyclically); the wrap gap holds the left cap
        if k == len(feet) - 1:
            return True
        return keys[k][1] == 0 and keys[k + 1][1] == 1

    capped = 0
    pseudo = []
    for cyc in cycles:
        gaps = [pos_in_rot[G.iota[h]] for h in cyc]
        bond_ids = sorted({h[0] for h in cyc})
        crossing = any(
            bonds_cross(sided[s][:2], sided[t][:2]) and sided[s][2] == sided[t][2]
            for ai, s in enumerate(bond_ids)
            for t in bond_ids[ai + 1 :]
        )
        touches_end = any(gap_hits_endpoint(k) for k in gaps)
        if crossing:
            pseudo.append([tuple(sided[t][:2]) for t in bond_ids])
        elif not touches_end:
            capped += 1
    return FoldSurfaceReport(b, chi, g, capped, pseudo)


def chiral_surface(B):
    """Fold surface with every band attached to the upper side."""
    return _fold_surface(B.m, [(i, j, "a") for i, j in B.bonds])


def achiral_surface(B, sides):
    """Fold surface with a chosen side per bond ('a' above, 'b' below)."""
    sided = []
    for i, j in B.bonds:
        key = frozenset((i, j))
        if key not in sides:
            raise PreconditionViolated(f"no side given for bond {{{i},{j}}}")
        side = sides[key]
        if side not in ("a", "b"):
            raise PreconditionViolated(f"side {side!r} is not 'a' or 'b'")
        sided.append((i, j, side))
    return _fold_surface(B.m, sided)


def enumerate_binary_bondings(m):
    """All bondings on 0..m with every site in at most one bond."""
    sites = list(range(m + 1))
    out = []

    def rec(idx, used, acc):
        while idx in used:
            idx += 1
        if idx > m:
            out.append(Bonding(m, acc))
            return
        rec(idx + 1, used | {idx}, acc)
        for j in range(idx + 2, m + 1):
            if j not in used:
                rec(idx + 1, used | {idx, j}, acc + [(idx, j)])

    rec(0, set(), [])
    return out


def planarity_theorem_check(max_m):
    """Exhaustive check that genus vanishes exactly for secondary structures.

    Sweeps every binary bonding on [0, m] for m up to max_m (desk scale,
    ten sites tops) and returns the number checked.  Raises on the first
    counterexample; none exists.
    """
    if max_m > 10:
        raise TooLarge("sweep capped at m = 10")
    checked = 0
    for m in range(0, max_m + 1):
        for B in enumerate_binary_bondings(m):
            planar = chiral_surface(B).genus == 0
            if planar != is_secondary_structure(B):
                raise PreconditionViolated(f"planarity mismatch at {B!r}")
            checked += 1
    return checked


def elongate_helix(B, bond):
    """Add the bond nested one site inside the given one."""
    i, j = sorted(bond)
    if (i, j) not in B.bonds:
        raise PreconditionViolated(f"bond {{{i},{j}}} absent")
    if j - i < 4:
        raise PreconditionViolated("no room to nest a bond inside")
    return Bonding(B.m, set(B.bonds) | {(i + 1, j - 1)})


def insert_free_site(B, position):
    """Insert an unbonded site, shifting sites at or past the position up."""
    if not 0 <= position <= B.m + 1:
        raise PreconditionViolated("position off the backbone")

    def sh(s):
        return s + 1 if s >= position else s

    return Bonding(B.m + 1, {(sh(i), sh(j)) for i, j in B.bonds})


def parse_bonding_text(text):
    """Parse the plain format: header 'm=<int>', then 'i j [side=a|b]' lines."""
    m = None
    bonds = []
    sides = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m is None:
            if not line.startswith("m="):
                raise PreconditionViolated("first line must set m=<int>")
            m = int(line[2:])
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise PreconditionViolated(f"bad bond line {line!r}")
        i, j = int(parts[0]), int(parts[1])
        side = "a"
        if len(parts) == 3:
            if not parts[2].startswith("side="):
                raise PreconditionViolated(f"bad bond line {line!r}")
            side = parts[2][5:]
        bonds.append((i, j))
        sides[frozenset((i, j))] = side
    if m is None:
        raise PreconditionViolated("empty bonding file")
    return Bonding(m, bonds), sides


def bonding_to_text(B, sides=None):
    lines = [f"m={B.m}"]
    for i, j in B.bonds:
        side = (sides or {}).get(frozenset((i, j)), "a")
        suffix = "" if side == "a" else f" side={side}"
        lines.append(f"{i} {j}{suffix}")
    return "\n".join(lines) + "\n"
