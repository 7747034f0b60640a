"""Galerkin space discretization on the interval and the unit square.

Meshes are uniform: m cells on (0, 1) in 1D, a structured triangulation of
the unit square with 2 m^2 triangles in 2D. Lagrange elements of order 1
(P1) or 2 (P2) with homogeneous Dirichlet conditions enforced by dof
elimination; all retained dofs are interior.

Spatial coefficient callables receive a float in 1D and an ndarray of shape
(2,) in 2D; matrix-valued coefficients return a Hermitian 2x2 array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "Mesh",
    "FeSpace",
    "SolverError",
    "make_mesh",
    "make_fe_space",
    "assemble_mass",
    "assemble_stiffness",
    "h1_gram",
    "load_vector",
    "l2_project",
    "stationary_solve",
    "solve_spd",
    "fe_eval",
    "nodal_coordinates",
    "prolong",
    "l2_error",
    "export_coo",
]

DIRECT_SOLVER_DOF_LIMIT = 50_000


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh of (0,1) or of the unit square (2 m^2 triangles)."""

    dim: int
    m: int
    vertices: np.ndarray  # (nv, dim)
    cells: np.ndarray  # (nc, dim + 1) vertex indices, CCW in 2D
    h: float  # element diameter bound


def make_mesh(dim: int, m: int) -> Mesh:
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    if m < 1:
        raise ValueError("m must be >= 1")
    if dim == 1:
        verts = (np.arange(m + 1, dtype=float) / m)[:, None]
        cells = np.column_stack([np.arange(m), np.arange(1, m + 1)])
        return Mesh(1, m, verts, cells, 1.0 / m)
    idx = lambda i, j: i * (m + 1) + j
    verts = np.array(
        [[i / m, j / m] for i in range(m + 1) for j in range(m + 1)], dtype=float
    )
    cells = []
    for i in range(m):
        for j in range(m):
            v00, v10 = idx(i, j), idx(i + 1, j)
            v01, v11 = idx(i, j + 1), idx(i + 1, j + 1)
            cells.append((v00, v10, v11))
            cells.append((v00, v11, v01))
    return Mesh(2, m, verts, np.array(cells), math.sqrt(2.0) / m)


@dataclass(frozen=True)
class FeSpace:
    """P1 or P2 Lagrange space with homogeneous Dirichlet elimination."""

    mesh: Mesh
    order: int
    nodes: np.ndarray  # (n_nodes, dim) coordinates of all Lagrange nodes
    cell_nodes: np.ndarray  # (nc, local) global node ids per cell
    dof_of_node: np.ndarray  # node id -> interior dof id or -1
    ndof: int

    @property
    def dim(self) -> int:
        return self.mesh.dim


def make_fe_space(mesh: Mesh, order: int) -> FeSpace:
    if order not in (1, 2):
        raise ValueError("order must be 1 (P1) or 2 (P2)")
    m = mesh.m
    if mesh.dim == 1:
        if order == 1:
            nodes = mesh.vertices.copy()
            cell_nodes = mesh.cells.copy()
            boundary = np.zeros(len(nodes), dtype=bool)
            boundary[[0, m]] = True
        else:
            nodes = (np.arange(2 * m + 1, dtype=float) / (2 * m))[:, None]
            cell_nodes = np.column_stack(
                [2 * np.arange(m), 2 * np.arange(m) + 1, 2 * np.arange(m) + 2]
            )
            boundary = np.zeros(len(nodes), dtype=bool)
            boundary[[0, 2 * m]] = True
    else:
        nv = (m + 1) ** 2
        grid_ij = np.array([(i, j) for i in range(m + 1) for j in range(m + 1)])
        vert_boundary = (
            (grid_ij[:, 0] == 0) | (grid_ij[:, 0] == m)
            | (grid_ij[:, 1] == 0) | (grid_ij[:, 1] == m)
        )
        if order == 1:
            nodes = mesh.vertices.copy()
            cell_nodes = mesh.cells.copy()
            boundary = vert_boundary
        else:
            edges: dict[tuple[int, int], int] = {}
            cell_nodes_list = []
            mid_coords = []
            mid_boundary = []

            def edge_node(a: int, b: int) -> int:
                key = (a, b) if a < b else (b, a)
                if key not in edges:
                    edges[key] = len(mid_coords)
                    mid_coords.append(0.5 * (mesh.vertices[a] + mesh.vertices[b]))
                    ia, ja = grid_ij[a]
                    ib, jb = grid_ij[b]
                    on_bnd = (ia == ib and ia in (0, m)) or (ja == jb and ja in (0, m))
                    mid_boundary.append(on_bnd)
                return nv + edges[key]

            for tri in mesh.cells:
                a, b, c = (int(v) for v in tri)
                cell_nodes_list.append(
                    (a, b, c, edge_node(a, b), edge_node(b, c), edge_node(c, a))
                )
            nodes = np.vstack([mesh.vertices, np.array(mid_coords)])
            cell_nodes = np.array(cell_nodes_list)
            boundary = np.concatenate([vert_boundary, np.array(mid_boundary)])
    dof_of_node = np.full(len(nodes), -1, dtype=int)
    interior = ~boundary
    dof_of_node[interior] = np.arange(int(interior.sum()))
    return FeSpace(mesh, order, nodes, cell_nodes, dof_of_node, int(interior.sum()))


# --- reference elements -------------------------------------------------

def _shapes_1d(order: int, t: np.ndarray):
    if order == 1:
        vals = np.stack([1.0 - t, t])
        ders = np.stack([-np.ones_like(t), np.ones_like(t)])
    else:
        vals = np.stack([(1.0 - t) * (1.0 - 2.0 * t), 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0)])
        ders = np.stack([4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0])
    return vals, ders


def _shapes_tri(order: int, pts: np.ndarray):
    """Values (local, nq) and reference gradients (local, nq, 2) on the triangle."""
    xi, eta = pts[:, 0], pts[:, 1]
    lam = np.stack([1.0 - xi - eta, xi, eta])
    grad_lam = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    if order == 1:
        vals = lam
        grads = np.broadcast_to(grad_lam[:, None, :], (3, len(xi), 2)).copy()
        return vals, grads
    vals = np.empty((6, len(xi)))
    grads = np.empty((6, len(xi), 2))
    for i in range(3):
        vals[i] = lam[i] * (2.0 * lam[i] - 1.0)
        grads[i] = (4.0 * lam[i] - 1.0)[:, None] * grad_lam[i]
    for k, (i, j) in enumerate(((0, 1), (1, 2), (2, 0))):
        vals[3 + k] = 4.0 * lam[i] * lam[j]
        grads[3 + k] = 4.0 * (lam[j][:, None] * grad_lam[i] + lam[i][:, None] * grad_lam[j])
    return vals, grads


def _gauss_01(q: int):
    x, w = np.polynomial.legendre.leggauss(q)
    return (x + 1.0) / 2.0, w / 2.0


# 7-point rule on the reference triangle, exact to degree 5; weights sum to 1/2
_B1 = (6.0 - math.sqrt(15.0)) / 21.0
_B2 = (6.0 + math.sqrt(15.0)) / 21.0
_TRI_PTS = np.array(
    [
        (1 / 3, 1 / 3),
        (_B1, _B1), (1.0 - 2.0 * _B1, _B1), (_B1, 1.0 - 2.0 * _B1),
        (_B2, _B2), (1.0 - 2.0 * _B2, _B2), (_B2, 1.0 - 2.0 * _B2),
    ]
)
_TRI_WTS = np.array(
    [9.0 / 80.0]
    + [(155.0 - math.sqrt(15.0)) / 2400.0] * 3
    + [(155.0 + math.sqrt(15.0)) / 2400.0] * 3
)


def _symmetrized(entries, rows, cols, ndof) -> sp.csr_matrix:
    a = sp.coo_matrix((entries, (rows, cols)), shape=(ndof, ndof)).tocsr()
    return (a + a.T) * 0.5


def _scatter(space: FeSpace, element_matrices) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for cell, ke in zip(space.cell_nodes, element_matrices):
        dofs = space.dof_of_node[cell]
        keep = dofs >= 0
        d = dofs[keep]
        ke = ke[np.ix_(keep, keep)]
        rows.append(np.repeat(d, len(d)))
        cols.append(np.tile(d, len(d)))
        vals.append(ke.reshape(-1))
    return _symmetrized(
        np.concatenate(vals), np.concatenate(rows), np.concatenate(cols), space.ndof
    )


def assemble_mass(space: FeSpace) -> sp.csr_matrix:
    """Mass matrix, exactly integrated, symmetric positive definite."""
    if space.dim == 1:
        t, w = _gauss_01(space.order + 1)
        vals, _ = _shapes_1d(space.order, t)
        h = 1.0 / space.mesh.m
        ke = h * np.einsum("q,iq,jq->ij", w, vals, vals)
        mats = [ke] * len(space.cell_nodes)
    else:
        vals, _ = _shapes_tri(space.order, _TRI_PTS)
        mats = []
        for cell in space.mesh.cells:
            p = space.mesh.vertices[cell]
            det = abs(np.linalg.det(np.column_stack([p[1] - p[0], p[2] - p[0]])))
            mats.append(det * np.einsum("q,iq,jq->ij", _TRI_WTS, vals, vals))
    return _scatter(space, mats)


def _coeff_at(coeff, x, dim: int) -> np.ndarray:
    if callable(coeff):
        val = coeff(x if dim == 2 else float(x))
    else:
        val = coeff
    if dim == 1:
        return np.asarray(val, dtype=float)
    val = np.asarray(val, dtype=float)
    if val.shape == ():
        return val * np.eye(2)
    if val.shape != (2, 2):
        raise ValueError(f"2D coefficient must be scalar or 2x2, got shape {val.shape}")
    if np.max(np.abs(val - val.T)) > 1e-12 * max(1.0, np.max(np.abs(val))):
        raise ValueError(f"non-Hermitian coefficient sample at x = {x}: {val}")
    return val


def assemble_stiffness(space: FeSpace, coeff) -> sp.csr_matrix:
    """Stiffness matrix of the diffusion form for a scalar (1D) or 2x2 (2D) field."""
    if space.dim == 1:
        t, w = _gauss_01(max(space.order + 1, 3))
        _, ders = _shapes_1d(space.order, t)
        h = 1.0 / space.mesh.m
        mats = []
        for cell in space.cell_nodes:
            x0 = space.nodes[cell[0], 0]
            xq = x0 + h * t
            c = np.array([_coeff_at(coeff, x, 1) for x in xq])
            mats.append(np.einsum("q,q,iq,jq->ij", w, c, ders, ders) / h)
    else:
        _, grads_ref = _shapes_tri(space.order, _TRI_PTS)
        mats = []
        for cell in space.mesh.cells:
            p = space.mesh.vertices[cell]
            jac = np.column_stack([p[1] - p[0], p[2] - p[0]])
            det = abs(np.linalg.det(jac))
            inv_jt = np.linalg.inv(jac).T
            grads = np.einsum("ab,iqb->iqa", inv_jt, grads_ref)
            xq = p[0][None, :] + _TRI_PTS @ jac.T
            cmats = np.array([_coeff_at(coeff, x, 2) for x in xq])
            mats.append(det * np.einsum("q,qab,iqa,jqb->ij", _TRI_WTS, cmats, grads, grads))
    return _scatter(space, mats)


def h1_gram(space: FeSpace) -> sp.csr_matrix:
    """Gram matrix of the H^1_0 seminorm (unit-coefficient stiffness)."""
    return assemble_stiffness(space, 1.0)


def load_vector(space: FeSpace, f, quad_order: int = 6) -> np.ndarray:
    """Right-hand side (f, phi_i) for a sampleable spatial function f."""
    b = np.zeros(space.ndof)
    if space.dim == 1:
        t, w = _gauss_01(quad_order)
        vals, _ = _shapes_1d(space.order, t)
        h = 1.0 / space.mesh.m
        for cell in space.cell_nodes:
            x0 = space.nodes[cell[0], 0]
            fq = np.array([f(float(x0 + h * ti)) for ti in t])
            be = h * np.einsum("q,q,iq->i", w, fq, vals)
            dofs = space.dof_of_node[cell]
            np.add.at(b, dofs[dofs >= 0], be[dofs >= 0])
    else:
        vals, _ = _shapes_tri(space.order, _TRI_PTS)
        for cell, cn in zip(space.mesh.cells, space.cell_nodes):
            p = space.mesh.vertices[cell]
            jac = np.column_stack([p[1] - p[0], p[2] - p[0]])
            det = abs(np.linalg.det(jac))
            xq = p[0][None, :] + _TRI_PTS @ jac.T
            fq = np.array([f(x) for x in xq])
            be = det * np.einsum("q,q,iq->i", _TRI_WTS, fq, vals)
            dofs = space.dof_of_node[cn]
            np.add.at(b, dofs[dofs >= 0], be[dofs >= 0])
    return b


def solve_spd(a: sp.spmatrix, b: np.ndarray) -> np.ndarray:
    """Direct sparse solve at desk scale, conjugate gradients above it."""
    n = a.shape[0]
    if n <= DIRECT_SOLVER_DOF_LIMIT:
        return spla.spsolve(a.tocsc(), b)
    x, info = spla.cg(a, b, rtol=1e-11, atol=0.0, maxiter=10 * n)
    if info != 0:
        res = float(np.linalg.norm(a @ x - b) / max(np.linalg.norm(b), 1e-300))
        raise SolverError(f"CG did not converge (info={info}, rel residual {res:.3e})")
    return x


def _checked_solve(a: sp.spmatrix, b: np.ndarray, rel_tol: float) -> np.ndarray:
    x = solve_spd(a, b)
    scale = float(np.linalg.norm(b))
    res = float(np.linalg.norm(a @ x - b))
    if res > rel_tol * max(scale, 1e-300):
        raise SolverError(f"solve residual {res:.3e} exceeds {rel_tol:.1e} * {scale:.3e}")
    return x


def l2_project(space: FeSpace, f, quad_order: int = 6) -> np.ndarray:
    """L2-orthogonal projection onto the space: solves M u = (f, phi)."""
    return _checked_solve(assemble_mass(space), load_vector(space, f, quad_order), 1e-10)


def stationary_solve(space: FeSpace, coeff, rhs) -> np.ndarray:
    """Galerkin solution of the stationary diffusion problem K u = (rhs, phi)."""
    k = assemble_stiffness(space, coeff)
    b = load_vector(space, rhs)
    return _checked_solve(k, b, 1e-10)


# --- point evaluation, prolongation, errors ------------------------------

def _full_node_values(space: FeSpace, u: np.ndarray) -> np.ndarray:
    full = np.zeros(len(space.nodes))
    sel = space.dof_of_node >= 0
    full[sel] = u[space.dof_of_node[sel]]
    return full


def fe_eval(space: FeSpace, u: np.ndarray, points) -> np.ndarray:
    """Evaluate the FE function (zero on the boundary) at arbitrary points."""
    full = _full_node_values(space, u)
    m = space.mesh.m
    if space.dim == 1:
        x = np.atleast_1d(np.asarray(points, dtype=float))
        cell = np.clip((x * m).astype(int), 0, m - 1)
        t = x * m - cell
        vals, _ = _shapes_1d(space.order, t)
        out = np.zeros_like(x)
        for loc in range(space.cell_nodes.shape[1]):
            out += full[space.cell_nodes[cell, loc]] * vals[loc]
        return out
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(len(pts))
    for p_i, (x, y) in enumerate(pts):
        i = min(int(x * m), m - 1)
        j = min(int(y * m), m - 1)
        xi, eta = x * m - i, y * m - j
        # cells appear in pairs per square: lower (xi >= eta) first
        cell_id = 2 * (i * m + j) + (0 if xi >= eta else 1)
        cell = space.mesh.cells[cell_id]
        p = space.mesh.vertices[cell]
        jac = np.column_stack([p[1] - p[0], p[2] - p[0]])
        ref = np.linalg.solve(jac, np.array([x, y]) - p[0])
        vals, _ = _shapes_tri(space.order, ref[None, :])
        out[p_i] = float(np.dot(full[space.cell_nodes[cell_id]], vals[:, 0]))
    return out


def nodal_coordinates(space: FeSpace) -> np.ndarray:
    """Coordinates of the interior dofs, in dof order."""
    sel = space.dof_of_node >= 0
    coords = space.nodes[sel]
    order = np.argsort(space.dof_of_node[sel])
    return coords[order]


def prolong(coarse: FeSpace, u: np.ndarray, fine: FeSpace) -> np.ndarray:
    """Exact transfer to a nested refinement of at least the same order."""
    if coarse.dim != fine.dim:
        raise ValueError("spaces live on different geometries")
    if fine.mesh.m % coarse.mesh.m != 0:
        raise ValueError("fine mesh is not a refinement of the coarse mesh")
    if fine.order < coarse.order:
        raise ValueError("fine space must contain the coarse space")
    pts = nodal_coordinates(fine)
    return fe_eval(coarse, u, pts if fine.dim == 2 else pts[:, 0])


def l2_error(space: FeSpace, u: np.ndarray, exact, quad_order: int = 6) -> float:
    """L2 distance between the FE function and a smooth exact function."""
    total = 0.0
    full = _full_node_values(space, u)
    if space.dim == 1:
        t, w = _gauss_01(quad_order)
        vals, _ = _shapes_1d(space.order, t)
        h = 1.0 / space.mesh.m
        for cell in space.cell_nodes:
            x0 = space.nodes[cell[0], 0]
            uh = full[cell] @ vals
            ue = np.array([exact(float(x0 + h * ti)) for ti in t])
            total += h * float(np.dot(w, (uh - ue) ** 2))
    else:
        vals, _ = _shapes_tri(space.order, _TRI_PTS)
        for cell, cn in zip(space.mesh.cells, space.cell_nodes):
            p = space.mesh.vertices[cell]
            jac = np.column_stack([p[1] - p[0], p[2] - p[0]])
            det = abs(np.linalg.det(jac))
            xq = p[0][None, :] + _TRI_PTS @ jac.T
            uh = full[cn] @ vals
            ue = np.array([exact(x) for x in xq])
            total += det * float(np.dot(_TRI_WTS, (uh - ue) ** 2))
    return math.sqrt(total)


def export_coo(a: sp.spmatrix) -> str:
    """Text export: `row col value` per line, 0-based, sorted."""
    coo = a.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [
        f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}"
        for k in order
        if coo.data[k] != 0.0
    ]
    return "\n".join(lines) + "\n"
