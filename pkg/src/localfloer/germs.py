"""Hamiltonian germs near a fixed point of R^{2n} and their flows.

A germ packages callbacks for H, grad H, and Hess H, all vectorized over a
batch of points of shape (N, 2n).  Coordinates are z = (x, y); the flow
solves z' = X_H(t, z) with X_H = (H_y, -H_x), and linearizations solve the
variational equation M' = J_vf Hess_H M alongside.

Time-dependent germs arise from smooth concatenation: two unit-time germs
are run back to back through a reparametrization whose derivative vanishes
to infinite order at the junction, so the concatenated Hamiltonian is smooth
and 1-periodic whenever the pieces vanish at their time endpoints.

The action of a closed orbit t -> phi_t(z), z a fixed point of the time-1
map, is

    A = integral_0^1 ( H(t, z(t)) - y(t) . x'(t) ) dt,

integrated as an extra component of the same ODE system.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import LeftDomain, NonIsolated, NotClosed, StepFailure
from .paths import SymplecticPath, index_report
from .symplectic import (
    SymplecticMatrix,
    admissible,
    spectrum,
    validate_symplectic,
    vectorfield_j,
)

__all__ = [
    "HamiltonianGerm",
    "flow_points",
    "flow_jacobians",
    "monodromy",
    "iterate",
    "translate",
    "concatenate",
    "orbit_action",
    "FixedPointRecord",
    "fixed_point_record",
    "find_fixed_points",
    "GapTable",
    "gap_table",
]

RTOL = 1e-11
ATOL = 1e-13


@dataclass
class HamiltonianGerm:
    """Callbacks are vectorized: z has shape (N, 2n); value (N,), grad (N, 2n),
    hess (N, 2n, 2n).  The time argument is a scalar."""

    n: int
    value: Callable[[float, np.ndarray], np.ndarray]
    grad: Callable[[float, np.ndarray], np.ndarray]
    hess: Callable[[float, np.ndarray], np.ndarray]
    name: str = ""
    autonomous: bool = True
    # set for germs built as direct sums; consumers may split along it
    factors: Optional[tuple] = None

    def vector_field(self, t: float, z: np.ndarray) -> np.ndarray:
        jvf = vectorfield_j(self.n)
        return self.grad(t, np.atleast_2d(z)) @ jvf.T


def _solve(rhs, y0: np.ndarray, t_final: float, dense: bool = False, rtol=RTOL, atol=ATOL):
    sol = solve_ivp(
        rhs,
        (0.0, t_final),
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=dense,
    )
    if not sol.success:
        raise StepFailure(f"integrator failed: {sol.message}")
    return sol


def flow_points(
    germ: HamiltonianGerm,
    points: np.ndarray,
    t_final: float = 1.0,
    domain_radius: Optional[float] = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> np.ndarray:
    """Time-t_final flow applied to a batch of points, shape preserved."""
    jvf = vectorfield_j(germ.n)
    z0 = np.atleast_2d(np.asarray(points, dtype=float))
    nbatch = z0.shape[0]

    def rhs(t, y):
        z = y.reshape(nbatch, 2 * germ.n)
        return (germ.grad(t, z) @ jvf.T).reshape(-1)

    sol = _solve(rhs, z0.reshape(-1), t_final, dense=domain_radius is not None, rtol=rtol, atol=atol)
    if domain_radius is not None:
        checks = sol.sol(np.linspace(0.0, t_final, 65)).T.reshape(65, nbatch, 2 * germ.n)
        reach = float(np.max(np.linalg.norm(checks, axis=2)))
        if reach > domain_radius:
            raise LeftDomain(f"trajectory reached radius {reach:.3e} > {domain_radius:.3e}")
    out = sol.y[:, -1].reshape(nbatch, 2 * germ.n)
    return out if np.asarray(points).ndim == 2 else out[0]


def flow_jacobians(
    germ: HamiltonianGerm,
    points: np.ndarray,
    t_final: float = 1.0,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> Tuple[np.ndarray, np.ndarray]:
    """Flow and its space derivative for a batch: (phi(z), Dphi(z))."""
    jvf = vectorfield_j(germ.n)
    dim = 2 * germ.n
    z0 = np.atleast_2d(np.asarray(points, dtype=float))
    nbatch = z0.shape[0]
    per = dim + dim * dim
    y0 = np.zeros((nbatch, per))
    y0[:, :dim] = z0
    y0[:, dim:] = np.eye(dim).reshape(-1)

    def rhs(t, y):
        blocks = y.reshape(nbatch, per)
        z = blocks[:, :dim]
        m = blocks[:, dim:].reshape(nbatch, dim, dim)
        dz = germ.grad(t, z) @ jvf.T
        dm = np.einsum("ab,nbc,ncd->nad", jvf, germ.hess(t, z), m)
        return np.concatenate([dz, dm.reshape(nbatch, -1)], axis=1).reshape(-1)

    sol = _solve(rhs, y0.reshape(-1), t_final, rtol=rtol, atol=atol)
    final = sol.y[:, -1].reshape(nbatch, per)
    phi = final[:, :dim]
    jac = final[:, dim:].reshape(nbatch, dim, dim)
    if np.asarray(points).ndim == 2:
        return phi, jac
    return phi[0], jac[0]


def monodromy(
    germ: HamiltonianGerm,
    point: Optional[np.ndarray] = None,
    t_final: float = 1.0,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> SymplecticPath:
    """Linearized flow along the trajectory of a point, as a path in Sp(2n)."""
    dim = 2 * germ.n
    jvf = vectorfield_j(germ.n)
    z0 = np.zeros(dim) if point is None else np.asarray(point, dtype=float)
    y0 = np.concatenate([z0, np.eye(dim).reshape(-1)])

    def rhs(t, y):
        z = y[:dim].reshape(1, dim)
        m = y[dim:].reshape(dim, dim)
        dz = (germ.grad(t, z) @ jvf.T)[0]
        dm = jvf @ (germ.hess(t, z)[0] @ m)
        return np.concatenate([dz, dm.reshape(-1)])

    sol = _solve(rhs, y0, t_final, dense=True, rtol=rtol, atol=atol)

    def ev(t: float) -> np.ndarray:
        tt = min(max(t, 0.0), t_final)
        return sol.sol(tt)[dim:].reshape(dim, dim)

    return SymplecticPath(germ.n, t_final, ev)


def iterate(germ: HamiltonianGerm, k: int) -> HamiltonianGerm:
    """Germ whose unit-time flow is the k-th iterate: k H(k t mod 1, z)."""
    if k < 1:
        raise ValueError("iteration order must be >= 1")
    if k == 1:
        return germ

    def wrap(f):
        def wrapped(t, z):
            s = (k * t) % 1.0
            return k * f(s, z)

        return wrapped

    return HamiltonianGerm(
        n=germ.n,
        value=wrap(germ.value),
        grad=wrap(germ.grad),
        hess=wrap(germ.hess),
        name=f"{germ.name}^'{k}" if germ.name else "",
        autonomous=germ.autonomous,
        factors=tuple(iterate(f, k) for f in germ.factors) if germ.factors else None,
    )


def translate(germ: HamiltonianGerm, point: np.ndarray) -> HamiltonianGerm:
    """Germ seen from a shifted origin: H'(t, z) = H(t, z + point).

    The time-1 map becomes z -> phi(z + point) - point, so a fixed point of
    phi at `point` sits at the origin of the translated germ.
    """
    p = np.asarray(point, dtype=float).reshape(1, -1)

    def shift(f):
        return lambda t, z: f(t, z + p)

    return HamiltonianGerm(
        n=germ.n,
        value=shift(germ.value),
        grad=shift(germ.grad),
        hess=shift(germ.hess),
        name=f"{germ.name}@shifted" if germ.name else "",
        autonomous=germ.autonomous,
    )


def _bump(s):
    return np.where(s > 1e-12, np.exp(-1.0 / np.maximum(s, 1e-12)), 0.0)


def _sigma(s):
    g, h = _bump(s), _bump(1.0 - s)
    return g / (g + h)


def _sigma_prime(s):
    # g'(s) = g(s)/s^2; flat to infinite order at both endpoints
    s = np.clip(s, 0.0, 1.0)
    g, h = _bump(s), _bump(1.0 - s)
    gp = np.where(s > 1e-12, g / np.maximum(s, 1e-12) ** 2, 0.0)
    hp = np.where(1.0 - s > 1e-12, h / np.maximum(1.0 - s, 1e-12) ** 2, 0.0)
    return (gp * h + g * hp) / (g + h) ** 2


def concatenate(first: HamiltonianGerm, second: HamiltonianGerm) -> HamiltonianGerm:
    """Unit-time germ whose flow is phi_second composed with phi_first.

    Each piece runs through the flat reparametrization sigma, so the result
    is smooth in t and vanishes near t in {0, 1/2, 1}.
    """
    if first.n != second.n:
        raise ValueError("dimension mismatch")

    def wrap(f1, f2):
        def wrapped(t, z):
            if t < 0.5:
                s = 2.0 * t
                return 2.0 * float(_sigma_prime(s)) * f1(float(_sigma(s)), z)
            s = 2.0 * t - 1.0
            return 2.0 * float(_sigma_prime(s)) * f2(float(_sigma(s)), z)

        return wrapped

    return HamiltonianGerm(
        n=first.n,
        value=wrap(first.value, second.value),
        grad=wrap(first.grad, second.grad),
        hess=wrap(first.hess, second.hess),
        name=f"{first.name}#{second.name}",
        autonomous=False,
    )


def orbit_action(
    germ: HamiltonianGerm,
    point: np.ndarray,
    closure_tol: float = 1e-6,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> float:
    """Action of the closed orbit through a fixed point of the time-1 map."""
    dim = 2 * germ.n
    jvf = vectorfield_j(germ.n)
    z0 = np.asarray(point, dtype=float)
    y0 = np.concatenate([z0, [0.0]])

    def rhs(t, y):
        z = y[:dim].reshape(1, dim)
        g = germ.grad(t, z)
        dz = (g @ jvf.T)[0]
        # integrand H - y . x', with x' the H_y block of the field
        da = float(germ.value(t, z)[0]) - float(np.dot(z[0, germ.n :], dz[: germ.n]))
        return np.concatenate([dz, [da]])

    sol = _solve(rhs, y0, 1.0, rtol=rtol, atol=atol)
    final = sol.y[:, -1]
    drift = float(np.linalg.norm(final[:dim] - z0))
    if drift > closure_tol:
        raise NotClosed(f"orbit endpoint differs from start by {drift:.3e}")
    return float(final[dim])


@dataclass(frozen=True)
class FixedPointRecord:
    """A fixed point of the time-1 map with its orbit invariants."""

    point: np.ndarray
    action: float
    path: SymplecticPath
    endpoint: SymplecticMatrix
    mean_index: float
    conley_zehnder: Optional[int]
    degenerate: bool

    def to_json(self) -> dict:
        return {
            "point": [float(v) for v in self.point],
            "action": self.action,
            "mean_index": self.mean_index,
            "conley_zehnder": self.conley_zehnder,
            "degenerate": self.degenerate,
            "monodromy": self.endpoint.to_json(),
        }


def fixed_point_record(germ: HamiltonianGerm, point: np.ndarray) -> FixedPointRecord:
    path = monodromy(germ, point)
    report = index_report(path)
    return FixedPointRecord(
        point=np.asarray(point, dtype=float),
        action=orbit_action(germ, point),
        path=path,
        endpoint=path.endpoint(),
        mean_index=report.mean_index,
        conley_zehnder=report.conley_zehnder,
        degenerate=report.degenerate,
    )


def find_fixed_points(
    germ: HamiltonianGerm,
    radius: float,
    seeds_per_axis: int = 9,
    newton_tol: float = 1e-11,
    max_iter: int = 40,
) -> List[FixedPointRecord]:
    """Newton search for fixed points of the time-1 map inside a box.

    Seeds a uniform grid on [-radius, radius]^{2n}, runs a damped-free Newton
    iteration on phi(z) - z, deduplicates converged points, and returns full
    records.  Raises NonIsolated when converged points accumulate: either two
    distinct points closer than 100 * newton_tol, or more points than half
    the seed count, which signals a positive-dimensional fixed set.
    """
    dim = 2 * germ.n
    axes = [np.linspace(-radius, radius, seeds_per_axis)] * dim
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    z = grid.copy()
    active = np.ones(len(z), dtype=bool)
    converged: List[np.ndarray] = []

    for _ in range(max_iter):
        if not np.any(active):
            break
        za = z[active]
        phi, jac = flow_jacobians(germ, za)
        res = phi - za
        resn = np.linalg.norm(res, axis=1)
        done = resn <= newton_tol
        inside = np.linalg.norm(za, axis=1) <= 1.5 * radius
        for p in za[done & inside]:
            converged.append(p)
        keep = ~done
        a = jac - np.eye(dim)
        step = np.empty_like(res)
        for i in np.where(keep)[0]:
            try:
                step[i] = np.linalg.solve(a[i], res[i])
            except np.linalg.LinAlgError:
                step[i] = np.linalg.lstsq(a[i], res[i], rcond=None)[0]
        za_new = za - np.where(keep[:, None], step, 0.0)
        ok = keep & np.all(np.isfinite(za_new), axis=1) & (
            np.linalg.norm(za_new, axis=1) <= 3.0 * radius
        )
        idx = np.where(active)[0]
        z[idx[ok]] = za_new[ok]
        newactive = np.zeros(len(z), dtype=bool)
        newactive[idx[ok]] = True
        active = newactive

    dedup_tol = max(10.0 * newton_tol, 1e-9)
    points: List[np.ndarray] = []
    for p in sorted(converged, key=lambda q: (float(np.linalg.norm(q)), tuple(q))):
        if all(np.linalg.norm(p - q) > dedup_tol for q in points):
            points.append(p)
    for i, p in enumerate(points):
        for q in points[i + 1 :]:
            if np.linalg.norm(p - q) < 100.0 * newton_tol:
                raise NonIsolated(
                    f"fixed points {p} and {q} within 100 * newton_tol"
                )
    if len(points) > len(grid) // 2:
        raise NonIsolated(
            f"{len(points)} distinct fixed points from {len(grid)} seeds; "
            "fixed set appears positive-dimensional"
        )
    return [fixed_point_record(germ, p) for p in points]


@dataclass(frozen=True)
class GapTable:
    """Pairwise action and index gaps of the k-th iterate."""

    order: int
    rows: tuple

    @property
    def min_gamma(self) -> Optional[float]:
        return min((r["gamma"] for r in self.rows), default=None)

    def to_json(self) -> dict:
        return {"order": self.order, "rows": list(self.rows), "min_gamma": self.min_gamma}


def gap_table(records: Sequence[FixedPointRecord], k: int) -> GapTable:
    """Gaps k |A_i - A_j| and k |Delta_i - Delta_j| for all pairs i < j.

    Requires k admissible for every record monodromy."""
    for rec in records:
        if not admissible(rec.endpoint, k):
            from .errors import NotAdmissible

            raise NotAdmissible(f"order {k} not admissible at {rec.point}")
    rows = []
    for i in range(len(records)):
        for j in range(i + 1, len(records)):
            da = k * abs(records[i].action - records[j].action)
            di = k * abs(records[i].mean_index - records[j].mean_index)
            rows.append(
                {
                    "pair": [i, j],
                    "action_gap": da,
                    "index_gap": di,
                    "gamma": da + di,
                }
            )
    return GapTable(order=k, rows=tuple(rows))
