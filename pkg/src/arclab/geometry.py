"""Decorated-triangle calculus in the Minkowski model.

The hyperbolic plane sits inside R^{2,1} as the upper sheet of the unit
hyperboloid; horocycles correspond bijectively to points u of the forward light
cone L+ = {<u,u> = 0, z > 0} via h(u) = {w : <w,u> = -1}.  The lambda length of
a pair of horocycles is sqrt(2 exp delta), delta the signed distance between
them, and in light-cone coordinates lambda(h(u), h(v)) = sqrt(-<u,v>).

All purely rational formulas below (h-lengths, diagonal flip, cross-ratio,
simplicial coordinates) preserve exact arithmetic: feed them Fractions and they
return Fractions, feed them floats and they return floats.  Anything passing
through sqrt/log returns floats.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateRay, NonRealizable

TOL_LC = 1e-9


def _exact(*xs):
    """True when every argument is an int or Fraction (safe for Fraction math)."""
    return all(isinstance(x, (int, Fraction)) for x in xs)


def _div(num, den):
    # int/int would silently become float; promote to Fraction instead.
    if _exact(num, den):
        return Fraction(num, den) if not isinstance(num, Fraction) else num / den
    return num / den


def minkowski_inner(u, v):
    """<u,v> = ux vx + uy vy - uz vz."""
    return u[0] * v[0] + u[1] * v[1] - u[2] * v[2]


def validate_light_cone(v, tol=TOL_LC):
    """Check v lies on the forward light cone within tol (relative in z^2)."""
    q = minkowski_inner(v, v)
    scale = max(1.0, float(v[2]) * float(v[2]))
    if abs(float(q)) > tol * scale:
        raise NonRealizable(f"not on the light cone: <v,v> = {float(q):.3e}")
    if not v[2] > 0:
        raise NonRealizable("not on the forward sheet: z <= 0")
    return tuple(v)


def lambda_from_points(u0, u1):
    """Lambda length of the horocycles h(u0), h(u1): sqrt(-<u0,u1>).

    Raises DegenerateRay when <u0,u1> >= 0, i.e. the points span a degenerate
    (same-ray) configuration with no finite lambda length.
    """
    ip = minkowski_inner(u0, u1)
    if ip >= 0:
        raise DegenerateRay(f"<u0,u1> = {float(ip):.3e} >= 0")
    if _exact(ip):
        r = Fraction(-ip)
        # keep exactness for perfect squares, e.g. integer test fixtures
        if r.numerator == math.isqrt(r.numerator) ** 2 and r.denominator == math.isqrt(r.denominator) ** 2:
            return Fraction(math.isqrt(r.numerator), math.isqrt(r.denominator))
    return math.sqrt(-ip)


def lambda_from_distance(delta):
    """Lambda length from the signed distance between two horocycles."""
    return math.sqrt(2.0 * math.exp(delta))


def h_lengths(l0, l1, l2):
    """Horocyclic sector lengths of a decorated triangle.

    Entry i is the length of the horocyclic segment cut out at the vertex
    opposite the edge of lambda length l_i, namely l_i / (l_j l_k).
    """
    return (_div(l0, l1 * l2), _div(l1, l0 * l2), _div(l2, l0 * l1))


def equidistant_exists(l0, l1, l2):
    """Whether a point equidistant to all three decorating horocycles exists.

    Holds iff the three strict triangle inequalities among lambda lengths do.
    """
    return l0 < l1 + l2 and l1 < l0 + l2 and l2 < l0 + l1


@dataclass(frozen=True)
class QuadData:
    """Lambda lengths of an ideal quadrilateral with a chosen diagonal.

    Sides a, b, c, d in cyclic order around the quadrilateral; e is the
    diagonal separating the (a, b) triangle from the (c, d) triangle, so a and
    c are opposite sides.
    """

    a: object
    b: object
    c: object
    d: object
    e: object

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "e"):
            if not getattr(self, name) > 0:
                raise NonRealizable(f"lambda length {name} must be positive")


def ptolemy_flip(q):
    """Lambda length of the other diagonal: f = (ac + bd) / e."""
    return _div(q.a * q.c + q.b * q.d, q.e)


def cross_ratio(a, b, c, d):
    """The flip-invariant cross-ratio ac / bd of the quadrilateral sides."""
    return _div(a * c, b * d)


def simplicial_coordinate(q):
    """E = (a^2 + b^2 - e^2)/(abe) + (c^2 + d^2 - e^2)/(cde).

    Equivalently (alpha + beta - eps) + (gamma + delta - phi) in the sector
    h-lengths adjacent/opposite to the diagonal in the two flanking triangles.
    """
    a, b, c, d, e = q.a, q.b, q.c, q.d, q.e
    return _div(a * a + b * b - e * e, a * b * e) + _div(c * c + d * d - e * e, c * d * e)


def boundary_simplicial_coordinate(a, b, e):
    """Doubled one-triangle coordinate 2(a^2 + b^2 - e^2)/(abe) for boundary edges."""
    return _div(2 * (a * a + b * b - e * e), a * b * e)


def coupling_residual(alpha, beta, gamma, delta):
    """log(alpha*beta / (gamma*delta)); zero iff the coupling identity holds."""
    return math.log(float(alpha) * float(beta) / (float(gamma) * float(delta)))


def realize_triangle(triple):
    """Place a decorated triangle on the light cone in normal position.

    Returns points (P0, P1, P2) with lambda(P0,P1) = l0, lambda(P1,P2) = l1,
    lambda(P2,P0) = l2.  Normal position: P0 on the ray through (1,0,1), P1 on
    the x-z plane (ray through (-1,0,1)), P2 with positive y.  Always solvable
    for positive inputs; (sqrt2, sqrt2, sqrt2) lands on (1,0,1), (-1,0,1),
    (0,2,2).
    """
    l0, l1, l2 = (float(x) for x in triple)
    if not (l0 > 0 and l1 > 0 and l2 > 0):
        raise NonRealizable("lambda lengths must be positive")
    s = l0 / math.sqrt(2.0)
    p0 = (s, 0.0, s)
    p1 = (-s, 0.0, s)
    x = (l1 * l1 - l2 * l2) / (math.sqrt(2.0) * l0)
    z = (l1 * l1 + l2 * l2) / (math.sqrt(2.0) * l0)
    y = math.sqrt(2.0) * l1 * l2 / l0
    return p0, p1, (x, y, z)


def _side(p, q, w):
    """Sign of det[p; q; w], the side of w relative to the plane through 0, p, q."""
    return (
        p[0] * (q[1] * w[2] - q[2] * w[1])
        - p[1] * (q[0] * w[2] - q[2] * w[0])
        + p[2] * (q[0] * w[1] - q[1] * w[0])
    )


def realize_quadrilateral(q):
    """Light-cone points (P0..P3) of the quadrilateral and its signed volume.

    P0 P1 P2 realize the (a, b, e) triangle in normal position; P3 is solved on
    the light cone with lambda(P2,P3) = c, lambda(P3,P0) = d, placed on the
    opposite side of the diagonal plane from P1.  The signed volume is
    det(P1-P0, P2-P0, P3-P0)/6; empirically it equals a universal constant
    times a*b*c*d*E(q), so its sign tracks the simplicial coordinate of the
    diagonal.  Raises NonRealizable when no such fourth point exists.
    """
    c, d = float(q.c), float(q.d)
    p0, p1, p2 = realize_triangle((q.a, q.b, q.e))
    # solve <p0,p3> = -d^2, <p2,p3> = -c^2, <p3,p3> = 0
    row0 = (p0[0], p0[1], -p0[2])
    row2 = (p2[0], p2[1], -p2[2])
    # direction of the solution line: Euclidean cross product of the two rows
    n = (
        row0[1] * row2[2] - row0[2] * row2[1],
        row0[2] * row2[0] - row0[0] * row2[2],
        row0[0] * row2[1] - row0[1] * row2[0],
    )
    # particular solution via 2x2 solve with one coordinate pinned to zero
    u = _particular(row0, row2, -d * d, -c * c)
    if u is None:
        raise NonRealizable("diagonal plane constraints are singular")
    qu = minkowski_inner(u, u)
    qun = minkowski_inner(u, n)
    qn = minkowski_inner(n, n)
    cands = []
    if abs(qn) < 1e-30:
        if abs(qun) < 1e-30:
            raise NonRealizable("light-cone quadratic degenerates")
        t = -qu / (2.0 * qun)
        cands = [t]
    else:
        disc = qun * qun - qn * qu
        if disc < 0:
            raise NonRealizable(f"negative discriminant {disc:.3e}")
        r = math.sqrt(disc)
        cands = [(-qun + r) / qn, (-qun - r) / qn]
    side1 = _side(p0, p2, p1)
    best = None
    for t in cands:
        p3 = (u[0] + t * n[0], u[1] + t * n[1], u[2] + t * n[2])
        if p3[2] <= 0:
            continue
        if _side(p0, p2, p3) * side1 > 0:
            continue
        best = p3
        break
    if best is None:
        raise NonRealizable("no fourth point on the proper side")
    p3 = best
    v1 = (p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2])
    v2 = (p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2])
    v3 = (p3[0] - p0[0], p3[1] - p0[1], p3[2] - p0[2])
    vol = _side(v1, v2, v3) / 6.0
    return (p0, p1, p2, p3), vol


def _particular(row0, row2, b0, b2):
    """One solution of the 2x3 system row0.x = b0, row2.x = b2."""
    pairs = ((1, 2), (0, 2), (0, 1))
    for zero_at, (i, j) in zip((0, 1, 2), pairs):
        det = row0[i] * row2[j] - row0[j] * row2[i]
        if abs(det) > 1e-12 * (abs(row0[i] * row2[j]) + abs(row0[j] * row2[i]) + 1e-300):
            xi = (b0 * row2[j] - b2 * row0[j]) / det
            xj = (row0[i] * b2 - row2[i] * b0) / det
            out = [0.0, 0.0, 0.0]
            out[i], out[j] = xi, xj
            return tuple(out)
    return None


def wp_form(triangulation):
    """Coefficient matrix of the Kaehler two-form in the dlog lambda basis.

    The form is -2 * sum over triangles of
    (dlog l0 ^ dlog l1 + dlog l1 ^ dlog l2 + dlog l2 ^ dlog l0), edges taken in
    each triangle's cyclic (orientation) order.  Returns an antisymmetric
    integer matrix M indexed by edge ids: the form is
    sum_{i<j} M[i][j] dlog l_i ^ dlog l_j.  The coefficients do not depend on
    the decoration.
    """
    E = triangulation.num_edges
    M = [[0] * E for _ in range(E)]
    for tri in triangulation.triangles:
        es = [triangulation.edge_of_slot[s] for s in tri]
        for k in range(3):
            i, j = es[k], es[(k + 1) % 3]
            M[i][j] -= 2
            M[j][i] += 2
    return M
