"""Reconstruction of a decoration from target edge coordinates.

Variables are sector h-lengths, one per triangle corner, indexed (triangle,
corner).  The linear constraints say that around every edge the adjacent
sectors minus the opposite ones add up to the target coordinate (boundary
edges count double), and the energy penalizes the mismatch of the two
adjacent-sector products across each internal edge.  At a zero of the energy
on the constraint set both products equal 1/lambda^2, which is how lambda
lengths are read off.

The minimizer works in u = log h, where the energy is a convex quadratic; it
takes projected gradient steps with Barzilai-Borwein lengths, backtracks to
keep the energy monotone over accepted iterations, and re-solves the
constraints after every step with damped Newton restoration.  First-order
information only; no Hessians anywhere.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CouplingViolated, Infeasible, NoConvergence


@dataclass
class SolverConfig:
    tol_constraint: float = 1e-10
    tol_energy: float = 1e-14
    max_iters: int = 50000
    restore_iters: int = 50
    backtrack_max: int = 60
    init_slack_cap: float = 1.0


@dataclass
class SolveResult:
    h: dict
    energy: float
    residual_inf: float
    iterations: int
    energy_history: list = field(repr=False, default_factory=list)
    converged: bool = False


def sector_order(T):
    """Sectors (triangle, corner) in index order."""
    return [(t, k) for t in range(len(T.triangles)) for k in range(3)]


def constraint_matrix(T):
    """Dense matrix A with A h = X: rows edges, columns sectors."""
    F = len(T.triangles)
    A = np.zeros((T.num_edges, 3 * F))
    for e in range(T.num_edges):
        w = 2.0 if e in T.boundary_edges else 1.0
        for (t, k) in T.flanks(e):
            A[e, 3 * t + (k + 1) % 3] += w
            A[e, 3 * t + (k + 2) % 3] += w
            A[e, 3 * t + k] -= w
    return A

def energy_rows(T):
    """Signed sector index pattern of each internal-edge energy term."""
    rows = []
    for e in T.internal_edges:
        (t1, k1), (t2, k2) = T.flanks(e)
        rows.append(
            (
                e,
                (3 * t1 + (k1 + 1) % 3, 3 * t1 + (k1 + 2) % 3),
                (3 * t2 + (k2 + 1) % 3, 3 * t2 + (k2 + 2) % 3),
            )
        )
    return rows


def energy(T, h):
    """Sum of squared log-mismatches of the adjacent-sector products."""
    u = _to_u(T, h)
    return _energy_u(energy_rows(T), u)


def constraint_residual(T, h, X):
    """A h - X as a dict over edges."""
    A = constraint_matrix(T)
    hv = _to_h_vector(T, h)
    Xv = _to_X_vector(T, X)
    r = A @ hv - Xv
    return {e: r[e] for e in range(T.num_edges)}


def energy_gradient(T, h):
    """Gradient of the energy with respect to u = log h, as a dict."""
    u = _to_u(T, h)
    g = _grad_u(energy_rows(T), u, 3 * len(T.triangles))
    order = sector_order(T)
    return {order[i]: g[i] for i in range(len(order))}


def feasible_h_init(T, X, config=None):
    """Strictly positive h with A h = X, by maximizing the minimum slack.

    Raises Infeasible when no positive solution exists (which is exactly the
    failure of the sign and cycle conditions on X).
    """
    from scipy.optimize import linprog

    config = config or SolverConfig()
    A = constraint_matrix(T)
    Xv = _to_X_vector(T, X)
    E, S = A.shape
    # variables: h (S entries) then the slack s; maximize s
    c = np.zeros(S + 1)
    c[-1] = -1.0
    A_eq = np.hstack([A, np.zeros((E, 1))])
    A_ub = np.hstack([-np.eye(S), np.ones((S, 1))])
    b_ub = np.zeros(S)
    bounds = [(None, None)] * S + [(None, config.init_slack_cap)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=Xv, bounds=bounds, method="highs")
    if res.status != 0 or res.x is None:
        raise Infeasible("no solution to the constraint system")
    s = res.x[-1]
    if not s > 0:
        raise Infeasible("constraints admit no strictly positive solution")
    order = sector_order(T)
    return {order[i]: float(res.x[i]) for i in range(S)}


def minimize_energy(T, X, h0=None, config=None):
    """Drive the energy to zero on the constraint set {A h = X, h > 0}.

    Returns a SolveResult; raises NoConvergence (carrying the partial result)
    if the tolerances are not met within the iteration budget.
    """
    config = config or SolverConfig()
    if h0 is None:
        h0 = feasible_h_init(T, X, config)
    A = constraint_matrix(T)
    Xv = _to_X_vector(T, X)
    rows = energy_rows(T)
    S = A.shape[1]
    order = sector_order(T)
    u = np.log(np.array([float(h0[sk]) for sk in order]))

    u = _restore(A, Xv, u, config)
    K = _energy_u(rows, u)
    history = [K]
    g = _grad_proj(A, rows, u, S)
    step = 1.0
    prev_u = None
    prev_g = None
    it = 0
    while it < config.max_iters:
        res_inf = float(np.max(np.abs(A @ np.exp(u) - Xv))) if len(Xv) else 0.0
        if K <= config.tol_energy and res_inf <= config.tol_constraint:
            return _result(T, u, K, res_inf, it, history, True)
        gnorm = float(np.linalg.norm(g))
        if gnorm == 0.0:
            break
        if prev_u is not None:
            du = u - prev_u
            dg = g - prev_g
            denom = float(du @ dg)
            if denom > 0:
                step = float(du @ du) / denom
            step = min(max(step, 1e-12), 1e12)
        accepted = False
        trial = step
        for _ in range(config.backtrack_max):
            u_try = _restore(A, Xv, u - trial * g, config, strict=False)
            if u_try is None:
                trial *= 0.5
                continue
            K_try = _energy_u(rows, u_try)
            if K_try < K:
                prev_u, prev_g = u, g
                u, K = u_try, K_try
                g = _grad_proj(A, rows, u, S)
                history.append(K)
                accepted = True
                break
            trial *= 0.5
        it += 1
        if not accepted:
            break
    res_inf = float(np.max(np.abs(A @ np.exp(u) - Xv)))
    if K <= config.tol_energy and res_inf <= config.tol_constraint:
        return _result(T, u, K, res_inf, it, history, True)
    partial = _result(T, u, K, res_inf, it, history, False)
    raise NoConvergence(
        f"stopped after {it} iterations: energy {K:.3e}, residual {res_inf:.3e}",
        partial,
    )


def lambdas_from_h(T, h, tol_energy=1e-14):
    """Read lambda lengths off a solved sector vector.

    Internal edges must satisfy the coupling (both adjacent-sector products
    equal) within 10 * sqrt(tol_energy) in log; CouplingViolated otherwise.
    """
    cut = 10.0 * math.sqrt(tol_energy)
    lam = {}
    for e in range(T.num_edges):
        flanks = T.flanks(e)
        prods = []
        for (t, k) in flanks:
            prods.append(float(h[(t, (k + 1) % 3)]) * float(h[(t, (k + 2) % 3)]))
        if len(prods) == 2:
            r = math.log(prods[0] / prods[1])
            if abs(r) > cut:
                raise CouplingViolated(f"edge {e}: log mismatch {r:.3e} exceeds {cut:.3e}")
            lam[e] = (prods[0] * prods[1]) ** -0.25
        else:
            lam[e] = prods[0] ** -0.5
    return lam


def solve_arithmetic_problem(T, X, config=None):
    """Full pipeline: feasible start, energy minimization, lambda readout."""
    config = config or SolverConfig()
    h0 = feasible_h_init(T, X, config)
    result = minimize_energy(T, X, h0=h0, config=config)
    lam = lambdas_from_h(T, result.h, tol_energy=config.tol_energy)
    return result, lam


# -- internals -------------------------------------------------------------------


def _to_h_vector(T, h):
    return np.array([float(h[sk]) for sk in sector_order(T)])


def _to_X_vector(T, X):
    return np.array([float(X[e]) for e in range(T.num_edges)])


def _to_u(T, h):
    return np.log(_to_h_vector(T, h))


def _energy_u(rows, u):
    K = 0.0
    for (_, (i, j), (p, q)) in rows:
        r = u[i] + u[j] - u[p] - u[q]
        K += r * r
    return K


def _grad_u(rows, u, S):
    g = np.zeros(S)
    for (_, (i, j), (p, q)) in rows:
        r = u[i] + u[j] - u[p] - u[q]
        g[i] += 2 * r
        g[j] += 2 * r
        g[p] -= 2 * r
        g[q] -= 2 * r
    return g


def _tangent_project(A, u, v):
    # tangent space of {A e^u = X} at u is the kernel of A diag(e^u)
    J = A * np.exp(u)[None, :]
    M = J @ J.T
    try:
        y = np.linalg.solve(M, J @ v)
    except np.linalg.LinAlgError:
        y, *_ = np.linalg.lstsq(M, J @ v, rcond=None)
    return v - J.T @ y

def _grad_proj(A, rows, u, S):
    return _tangent_project(A, u, _grad_u(rows, u, S))


def _restore(A, Xv, u, config, strict=True):
    """Damped Newton in the normal direction until A e^u = X holds tightly."""
    u = u.copy()
    r = A @ np.exp(u) - Xv
    best = float(np.max(np.abs(r))) if len(r) else 0.0
    for _ in range(config.restore_iters):
        if best <= config.tol_constraint:
            return u
        J = A * np.exp(u)[None, :]
        M = J @ J.T
        try:
            y = np.linalg.solve(M, -r)
        except np.linalg.LinAlgError:
            y, *_ = np.linalg.lstsq(M, -r, rcond=None)
        du = J.T @ y
        scale = 1.0
        norm = float(np.max(np.abs(du)))
        if norm > 1.0:
            scale = 1.0 / norm
        improved = False
        for _ in range(30):
            u_try = u + scale * du
            r_try = A @ np.exp(u_try) - Xv
            n_try = float(np.max(np.abs(r_try)))
            if n_try < best:
                u, r, best = u_try, r_try, n_try
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
    if best <= config.tol_constraint:
        return u
    if strict:
        raise NoConvergence(f"constraint restoration stalled at {best:.3e}")
    return None


def _result(T, u, K, res_inf, it, history, ok):
    order = sector_order(T)
    h = {order[i]: float(np.exp(u[i])) for i in range(len(order))}
    return SolveResult(
        h=h,
        energy=float(K),
        residual_inf=res_inf,
        iterations=it,
        energy_history=history,
        converged=ok,
    )
