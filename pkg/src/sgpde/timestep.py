"""A-stable rational time stepping for the semi-discrete parabolic system.

A scheme is a rational function r = num/den applied to the scaled negative
generator; with a mass matrix M and a stiffness matrix K one step of size
tau solves

    (d0 M - d1 tau K) u_next = (n0 M - n1 tau K) u.

Implicit Euler (r(z) = 1/(1-z)) and Crank--Nicolson
(r(z) = (1+z/2)/(1-z/2)) are the provided instances; both pass the
A-acceptability probe at construction. With M = I the formulas reduce to
the resolvent form of the schemes on the continuous state space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .spatial import SolverError

__all__ = [
    "RationalScheme",
    "TimeGrid",
    "implicit_euler",
    "crank_nicolson",
    "scheme_by_name",
    "rational_symbol",
    "a_stability_probe",
    "make_uniform_grid",
    "step",
    "Propagator",
    "evolve",
    "consistency_probe",
]

STEP_RESIDUAL_TOL = 1e-11


@dataclass(frozen=True)
class RationalScheme:
    """Rational symbol r(z) = num(z)/den(z), both at most linear in z."""

    name: str
    num: tuple[float, float]
    den: tuple[float, float]

    def r(self, z):
        z = np.asarray(z)
        return (self.num[0] + self.num[1] * z) / (self.den[0] + self.den[1] * z)


def a_stability_probe(scheme: RationalScheme, n_samples: int = 200):
    """Sample |r| on the closed left half plane; return (boundary_max, interior_max)."""
    rng = np.random.default_rng(12345)
    ys = np.concatenate([[0.0], np.logspace(-3, 4, n_samples // 2)])
    boundary = np.concatenate([1j * ys, -1j * ys[1:]])
    re = -np.exp(rng.uniform(np.log(1e-3), np.log(1e4), n_samples))
    im = rng.uniform(-1e4, 1e4, n_samples)
    interior = re + 1j * im
    bmax = float(np.max(np.abs(scheme.r(boundary))))
    imax = float(np.max(np.abs(scheme.r(interior))))
    return bmax, imax


def _validated(scheme: RationalScheme) -> RationalScheme:
    bmax, imax = a_stability_probe(scheme)
    if bmax > 1.0 + 1e-12 or imax > 1.0 + 1e-12:
        raise ValueError(f"{scheme.name} fails the A-acceptability probe")
    if imax >= 1.0:
        raise ValueError(f"{scheme.name} is not A-stable: |r| = {imax} inside Re z < 0")
    return scheme


def implicit_euler() -> RationalScheme:
    return _validated(RationalScheme("implicit_euler", (1.0, 0.0), (1.0, -1.0)))


def crank_nicolson() -> RationalScheme:
    return _validated(RationalScheme("crank_nicolson", (1.0, 0.5), (1.0, -0.5)))


def scheme_by_name(name: str) -> RationalScheme:
    try:
        return {"implicit_euler": implicit_euler, "crank_nicolson": crank_nicolson}[name]()
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}") from None


def rational_symbol(scheme: RationalScheme, z):
    return scheme.r(z)


@dataclass(frozen=True)
class TimeGrid:
    """Positive steps summing to the final time; points are the partial sums."""

    t_final: float
    steps: tuple[float, ...]

    def __post_init__(self):
        if self.t_final <= 0.0:
            raise ValueError("final time must be positive")
        if any(s <= 0.0 for s in self.steps):
            raise ValueError("all steps must be positive")
        if abs(sum(self.steps) - self.t_final) > 1e-12 * max(1.0, self.t_final):
            raise ValueError("steps do not sum to the final time")

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.steps)])

    @property
    def tau_max(self) -> float:
        return max(self.steps)


def make_uniform_grid(t_final: float, n_steps: int) -> TimeGrid:
    if n_steps < 1:
        raise ValueError("need at least one step")
    return TimeGrid(t_final, (t_final / n_steps,) * n_steps)


class Propagator:
    """One-step map of a scheme for fixed (M, K); factorizations cached per tau."""

    def __init__(self, scheme: RationalScheme, mass, stiff):
        self.scheme = scheme
        self.mass = sp.csr_matrix(mass)
        self.stiff = sp.csr_matrix(stiff)
        self._lu: dict[float, object] = {}

    def _system(self, tau: float):
        n0, n1 = self.scheme.num
        d0, d1 = self.scheme.den
        lhs = d0 * self.mass - d1 * tau * self.stiff
        rhs = (n0, n1, tau)
        return lhs, rhs

    def step(self, u: np.ndarray, tau: float) -> np.ndarray:
        if tau <= 0.0:
            raise ValueError("tau must be positive")
        lhs, (n0, n1, tau) = self._system(tau)
        if tau not in self._lu:
            self._lu[tau] = spla.splu(lhs.tocsc())
        b = n0 * (self.mass @ u) - n1 * tau * (self.stiff @ u)
        out = self._lu[tau].solve(b)
        res = float(np.linalg.norm(lhs @ out - b))
        if res > STEP_RESIDUAL_TOL * max(float(np.linalg.norm(b)), 1e-300):
            raise SolverError(f"time step residual {res:.3e} too large for tau = {tau}")
        return out


def step(scheme: RationalScheme, tau: float, mass, stiff, u: np.ndarray) -> np.ndarray:
    """Single step; for repeated stepping use a Propagator (cached solver)."""
    return Propagator(scheme, mass, stiff).step(u, tau)


def evolve(scheme: RationalScheme, grid: TimeGrid, mass, stiff, u0: np.ndarray) -> dict:
    """March the grid; returns {grid point: state}, including t = 0."""
    prop = Propagator(scheme, mass, stiff)
    out = {0.0: np.array(u0, dtype=float)}
    t = 0.0
    u = out[0.0]
    for tau in grid.steps:
        u = prop.step(u, tau)
        t += tau
        out[t] = u
    # key the final state by the exact grid value to avoid cumsum drift
    pts = grid.points
    if len(out) == len(pts):
        out = {p: v for p, v in zip(pts, out.values())}
    return out


def _exact_flow(mass, stiff, u0: np.ndarray, taus) -> list[np.ndarray]:
    """Reference semigroup states via the generalized eigendecomposition."""
    import scipy.linalg

    md = np.asarray(sp.csr_matrix(mass).todense())
    kd = np.asarray(sp.csr_matrix(stiff).todense())
    lam, vecs = scipy.linalg.eigh(kd, md)
    coeff = vecs.T @ (md @ u0)
    return [vecs @ (np.exp(-lam * t) * coeff) for t in taus]


@dataclass(frozen=True)
class ConsistencyResult:
    taus: tuple
    errors: tuple
    slope: float | None
    exact: bool


def consistency_probe(scheme, mass, stiff, u0, tau_list, substeps: int = 1000) -> ConsistencyResult:
    """Observed local order: log-log slope of one-step error against tau.

    The reference flow is the generalized eigendecomposition for small
    systems and a finely substepped Crank--Nicolson march otherwise. An
    error at the floor of machine precision reports exact=True instead of
    a slope.
    """
    mass = sp.csr_matrix(mass)
    stiff = sp.csr_matrix(stiff)
    u0 = np.asarray(u0, dtype=float)
    taus = sorted(float(t) for t in tau_list)
    if mass.shape[0] <= 400:
        refs = _exact_flow(mass, stiff, u0, taus)
    else:
        refs = []
        for tau in taus:
            grid = make_uniform_grid(tau, substeps)
            refs.append(evolve(crank_nicolson(), grid, mass, stiff, u0)[grid.points[-1]])
    prop = Propagator(scheme, mass, stiff)
    errors = []
    for tau, ref in zip(taus, refs):
        diff = prop.step(u0, tau) - ref
        errors.append(float(np.sqrt(diff @ (mass @ diff))))
    scale = float(np.sqrt(u0 @ (mass @ u0)))
    if max(errors) <= 1e-13 * max(scale, 1e-300):
        return ConsistencyResult(tuple(taus), tuple(errors), None, True)
    slope = float(np.polyfit(np.log(taus), np.log(errors), 1)[0])
    return ConsistencyResult(tuple(taus), tuple(errors), slope, False)
