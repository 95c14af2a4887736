"""Bilinear-quadrilateral plane-stress FEM oracle for the rectangular 2D problems.

The plate [0, Lx] x [0, Ly] is split into nx x ny equal rectangles. Element
moduli and conductivities are sampled at centroids, so every element matrix
is a scaled copy of one unit matrix. Coupled problems are solved staggered:
steady heat conduction first, then elasticity loaded by the thermal strain.

Nodes are numbered row by row, ``id = j * (nx + 1) + i``; displacement
dofs are ``2 * id`` (u1) and ``2 * id + 1`` (u2).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from ..autodiff import SpatialDual
from ..network import ConfigError

# corner order of the reference square, counter-clockwise
_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
_GAUSS = np.array([-1.0, 1.0]) / np.sqrt(3.0)

EDGES = ("bottom", "top", "left", "right")


def _shape(xi, eta):
    n = 0.25 * (1 + xi * _CORNERS[:, 0]) * (1 + eta * _CORNERS[:, 1])
    dxi = 0.25 * _CORNERS[:, 0] * (1 + eta * _CORNERS[:, 1])
    deta = 0.25 * _CORNERS[:, 1] * (1 + xi * _CORNERS[:, 0])
    return n, dxi, deta


def _B(xi, eta, hx, hy):
    """Strain-displacement matrix, engineering shear, (3, 8)."""
    _, dxi, deta = _shape(xi, eta)
    dx, dy = dxi * 2 / hx, deta * 2 / hy
    B = np.zeros((3, 8))
    B[0, 0::2] = dx
    B[1, 1::2] = dy
    B[2, 0::2] = dy
    B[2, 1::2] = dx
    return B


def _unit_D(nu: float) -> np.ndarray:
    return np.array([[1, nu, 0], [nu, 1, 0], [0, 0, (1 - nu) / 2]]) / (1 - nu * nu)


def element_matrices(hx: float, hy: float, nu: float):
    """Unit-modulus stiffness (8, 8), unit-conductivity matrix (4, 4) and the
    thermal-load operator G (8, 4) with ``f_e = E alpha G (T_e - T0)``."""
    D = _unit_D(nu)
    detJ = hx * hy / 4
    K = np.zeros((8, 8))
    H = np.zeros((4, 4))
    G = np.zeros((8, 4))
    for xi in _GAUSS:
        for eta in _GAUSS:
            n, dxi, deta = _shape(xi, eta)
            B = _B(xi, eta, hx, hy)
            K += B.T @ D @ B * detJ
            grad = np.vstack([dxi * 2 / hx, deta * 2 / hy])
            H += grad.T @ grad * detJ
            G += np.outer(B.T @ D @ np.array([1.0, 1.0, 0.0]), n) * detJ
    return K, H, G


@dataclass
class RectMesh:
    nx: int
    ny: int
    Lx: float
    Ly: float

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or self.Lx <= 0 or self.Ly <= 0:
            raise ConfigError("mesh needs positive element counts and lengths")

    @property
    def hx(self) -> float:
        return self.Lx / self.nx

    @property
    def hy(self) -> float:
        return self.Ly / self.ny

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(0.0, self.Lx, self.nx + 1)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(0.0, self.Ly, self.ny + 1)

    def coords(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs, self.ys)
        return np.column_stack([X.ravel(), Y.ravel()])

    def connectivity(self) -> np.ndarray:
        """(n_elements, 4) node ids, counter-clockwise from the lower-left corner."""
        i, j = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        n0 = (j * (self.nx + 1) + i).ravel()
        return np.column_stack([n0, n0 + 1, n0 + self.nx + 2, n0 + self.nx + 1])

    def centroids(self) -> np.ndarray:
        cx = (np.arange(self.nx) + 0.5) * self.hx
        cy = (np.arange(self.ny) + 0.5) * self.hy
        X, Y = np.meshgrid(cx, cy)
        return np.column_stack([X.ravel(), Y.ravel()])

    def edge_nodes(self, edge: str) -> np.ndarray:
        ids = np.arange(self.n_nodes).reshape(self.ny + 1, self.nx + 1)
        try:
            return {"bottom": ids[0], "top": ids[-1], "left": ids[:, 0], "right": ids[:, -1]}[edge]
        except KeyError:
            raise ConfigError(f"unknown edge {edge!r}") from None

    def edge_length_weights(self, edge: str) -> np.ndarray:
        """Trapezoid weights along an edge (lumped consistent load for constant traction)."""
        n = self.nx + 1 if edge in ("bottom", "top") else self.ny + 1
        h = self.hx if edge in ("bottom", "top") else self.hy
        w = np.full(n, h)
        w[[0, -1]] = h / 2
        return w


def _assemble(conn_dofs: np.ndarray, Ke: np.ndarray, scale: np.ndarray, size: int):
    rows = np.repeat(conn_dofs, conn_dofs.shape[1], axis=1).ravel()
    cols = np.tile(conn_dofs, (1, conn_dofs.shape[1])).ravel()
    vals = (scale[:, None, None] * Ke[None]).ravel()
    return sp.coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()


def _solve_constrained(K, f, fixed: dict[int, float]):
    """Solve K u = f with prescribed dofs; returns (u, reactions at all dofs)."""
    n = K.shape[0]
    if not fixed:
        raise ConfigError("stiffness is singular: no essential boundary conditions")
    c = np.array(sorted(fixed), dtype=int)
    uc = np.array([fixed[i] for i in c])
    free = np.setdiff1d(np.arange(n), c)
    u = np.zeros(n)
    u[c] = uc
    rhs = f[free] - K[free][:, c] @ uc
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            uf = spsolve(K[free][:, free].tocsc(), rhs)
        except (MatrixRankWarning, RuntimeError) as exc:
            raise ConfigError(f"stiffness is singular: {exc}") from exc
    if not np.all(np.isfinite(uf)):
        raise ConfigError("stiffness is singular: insufficient constraints")
    u[free] = uf
    return u, K @ u - f


def _check_rigid_modes(mesh: RectMesh, fixed: dict[int, float]) -> None:
    """Constrained dofs must rule out both translations and the in-plane rotation."""
    xy = mesh.coords()
    rigid = np.zeros((2 * mesh.n_nodes, 3))
    rigid[0::2, 0] = 1.0
    rigid[1::2, 1] = 1.0
    rigid[0::2, 2] = -xy[:, 1]
    rigid[1::2, 2] = xy[:, 0]
    c = np.array(sorted(fixed), dtype=int)
    if len(c) == 0 or np.linalg.matrix_rank(rigid[c], tol=1e-10 * max(mesh.Lx, mesh.Ly)) < 3:
        raise ConfigError("stiffness is singular: constraints leave a rigid-body mode")


@dataclass
class FemResult:
    """Nodal and element-centroid fields on a :class:`RectMesh`."""

    mesh: RectMesh
    u: np.ndarray  # (n_nodes, 2)
    T: np.ndarray | None  # (n_nodes,)
    strain: np.ndarray  # (n_elements, 3) total strain, tensor shear
    elastic_strain: np.ndarray  # (n_elements, 3)
    stress: np.ndarray  # (n_elements, 3)
    reactions: np.ndarray  # (2 * n_nodes,)
    external: np.ndarray  # (2 * n_nodes,) applied nodal forces

    def sample(self, points) -> dict[str, np.ndarray]:
        """Interpolate to arbitrary points in the plate.

        Displacement and temperature use the bilinear FE interpolant.
        Centroid strains and stresses are interpolated linearly over the
        centroid lattice (extrapolated in the outer half cell).
        """
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        m = self.mesh
        shape = (m.ny + 1, m.nx + 1)
        q = pts[:, ::-1]  # grid axes are (y, x)

        def nodal(values):
            return RegularGridInterpolator((m.ys, m.xs), values.reshape(shape))(q)

        cy = (np.arange(m.ny) + 0.5) * m.hy
        cx = (np.arange(m.nx) + 0.5) * m.hx

        def central(values):
            f = RegularGridInterpolator((cy, cx), values.reshape(m.ny, m.nx),
                                        bounds_error=False, fill_value=None)
            return f(q)

        out = {"u1": nodal(self.u[:, 0]), "u2": nodal(self.u[:, 1])}
        if self.T is not None:
            out["T"] = nodal(self.T)
        for k, name in enumerate(("11", "22", "12")):
            out["e" + name] = central(self.elastic_strain[:, k])
            out["s" + name] = central(self.stress[:, k])
        return out

    def duals(self, points) -> dict[str, SpatialDual]:
        """The bilinear FE interpolant of u (and T) with its exact spatial gradient.

        Usable as a ``fields_at`` evaluator for the energy loss.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        m = self.mesh
        i = np.clip(np.floor(pts[:, 0] / m.hx).astype(int), 0, m.nx - 1)
        j = np.clip(np.floor(pts[:, 1] / m.hy).astype(int), 0, m.ny - 1)
        a = pts[:, 0] / m.hx - i
        b = pts[:, 1] / m.hy - j
        n0 = j * (m.nx + 1) + i
        corners = [n0, n0 + 1, n0 + m.nx + 2, n0 + m.nx + 1]
        N = [(1 - a) * (1 - b), a * (1 - b), a * b, (1 - a) * b]
        dNa = [-(1 - b), 1 - b, b, -b]
        dNb = [-(1 - a), -a, a, 1 - a]

        def field(nodal):
            v = sum(Nk * nodal[c] for Nk, c in zip(N, corners))
            gx = sum(d * nodal[c] for d, c in zip(dNa, corners)) / m.hx
            gy = sum(d * nodal[c] for d, c in zip(dNb, corners)) / m.hy
            return SpatialDual(v, [gx, gy])

        out = {"u1": field(self.u[:, 0]), "u2": field(self.u[:, 1])}
        if self.T is not None:
            out["T"] = field(self.T)
        return out


def solve_heat(mesh: RectMesh, k: Callable, fixed_T: dict[str, float]) -> np.ndarray:
    """Steady conduction with prescribed edge temperatures; other edges insulated."""
    _, H, _ = element_matrices(mesh.hx, mesh.hy, 0.0)
    conn = mesh.connectivity()
    ke = np.asarray(k(mesh.centroids()), dtype=np.float64)
    K = _assemble(conn, H, ke, mesh.n_nodes)
    fixed = {}
    for edge, value in fixed_T.items():
        for nid in mesh.edge_nodes(edge):
            fixed[int(nid)] = float(value)
    T, _ = _solve_constrained(K, np.zeros(mesh.n_nodes), fixed)
    return T


def solve_elastic(mesh: RectMesh, E: Callable, nu: float, fixed: dict[int, float],
                  tractions: dict[str, tuple] | None = None,
                  T: np.ndarray | None = None, alpha: float = 0.0, T0: float = 0.0) -> FemResult:
    """Plane-stress elasticity with prescribed dofs, constant edge tractions
    and an optional nodal temperature field producing thermal strain."""
    _check_rigid_modes(mesh, fixed)
    Ke, _, G = element_matrices(mesh.hx, mesh.hy, nu)
    conn = mesh.connectivity()
    dofs = np.empty((len(conn), 8), dtype=int)
    dofs[:, 0::2] = 2 * conn
    dofs[:, 1::2] = 2 * conn + 1
    Ee = np.asarray(E(mesh.centroids()), dtype=np.float64)
    ndof = 2 * mesh.n_nodes
    K = _assemble(dofs, Ke, Ee, ndof)

    f = np.zeros(ndof)
    for edge, t in (tractions or {}).items():
        nodes = mesh.edge_nodes(edge)
        w = mesh.edge_length_weights(edge)
        f[2 * nodes] += w * t[0]
        f[2 * nodes + 1] += w * t[1]
    external = f.copy()
    if T is not None and alpha != 0.0:
        dT = T[conn] - T0  # (ne, 4)
        fe = alpha * Ee[:, None] * (dT @ G.T)
        np.add.at(f, dofs, fe)

    u, reactions = _solve_constrained(K, f, fixed)

    B0 = _B(0.0, 0.0, mesh.hx, mesh.hy)
    eng = u[dofs] @ B0.T  # (ne, 3) engineering shear
    strain = eng * np.array([1.0, 1.0, 0.5])
    el = strain.copy()
    if T is not None and alpha != 0.0:
        th = alpha * (T[conn].mean(axis=1) - T0)
        el[:, 0] -= th
        el[:, 1] -= th
    D = _unit_D(nu)
    stress = Ee[:, None] * ((el * np.array([1.0, 1.0, 2.0])) @ D.T)
    return FemResult(mesh, u.reshape(-1, 2), T, strain, el, stress, reactions, external)


def clamp_edge(mesh: RectMesh, edge: str, u1: float | None = 0.0, u2: float | None = 0.0) -> dict[int, float]:
    """Prescribed-dof map for one edge; ``None`` leaves a component free."""
    out = {}
    for nid in mesh.edge_nodes(edge):
        if u1 is not None:
            out[2 * int(nid)] = float(u1)
        if u2 is not None:
            out[2 * int(nid) + 1] = float(u2)
    return out


FEM_CODES = ("2D-FGM-ELAS-NEU", "2D-FGM-ELAS-DIRCH", "2D-FGM-THERMO-ELAS")


def fem_solve(problem, nx: int = 40, ny: int = 120) -> FemResult:
    """Reference solution for one of the rectangular 2D benchmarks.

    ``problem`` is a code or a :class:`~fgmpinn.problems.ProblemSpec`; its
    material and boundary data drive the solve on an L x 3L plate.
    """
    from ..problems import get_problem

    if isinstance(problem, str):
        problem = get_problem(problem)
    if problem.code not in FEM_CODES:
        raise ConfigError(f"no FEM oracle for {problem.code!r}")
    L = problem.length
    mesh = RectMesh(nx, ny, L, 3 * L)
    mat = problem.material
    fixed = clamp_edge(mesh, "bottom")
    tractions = {name: tuple(float(c) for c in t) for name, t in problem.loads.tractions.items()}
    T = None
    if problem.code == "2D-FGM-ELAS-DIRCH":
        fixed.update(clamp_edge(mesh, "top", u1=None, u2=1.0))
    elif problem.code == "2D-FGM-THERMO-ELAS":
        fixed.update(clamp_edge(mesh, "top", u1=None, u2=1.0))
        T = solve_heat(mesh, mat.k, {"bottom": 0.0, "top": 1.0})
    return solve_elastic(mesh, mat.E, mat.nu, fixed, tractions, T, mat.alpha, mat.T0)
