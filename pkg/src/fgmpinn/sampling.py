"""Integration node sets for the 1D bar, the L x 3L plate and the holed quarter plate."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .network import ConfigError


@dataclass
class BoundaryGroup:
    x: np.ndarray  # (M, d) points
    w: np.ndarray  # (M,) length (2D) or unit (1D) weights
    n: np.ndarray  # (M, d) outward unit normals


@dataclass
class NodeSet:
    x: np.ndarray  # (N, d)
    w: np.ndarray  # (N,)
    boundaries: dict[str, BoundaryGroup] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def measure(self) -> float:
        return float(self.w.sum())

    def __len__(self) -> int:
        return len(self.w)

    def integrate(self, values) -> float:
        return float(np.dot(self.w, values))

    def to_csv(self, path) -> None:
        """Columns x1, x2, w, group, n1, n2; group "interior" has zero normal."""
        rows = []
        pad = (lambda a: a) if self.dim == 2 else (lambda a: np.column_stack([a, np.zeros(len(a))]))
        xs = pad(self.x)
        for p, wi in zip(xs, self.w):
            rows.append([p[0], p[1], wi, "interior", 0.0, 0.0])
        for name, g in self.boundaries.items():
            for p, wi, nn in zip(pad(g.x), g.w, pad(g.n)):
                rows.append([p[0], p[1], wi, name, nn[0], nn[1]])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x1", "x2", "w", "group", "n1", "n2"])
            for r in rows:
                writer.writerow([repr(float(r[0])), repr(float(r[1])), repr(float(r[2])), r[3],
                                 repr(float(r[4])), repr(float(r[5]))])

    @classmethod
    def from_csv(cls, path, dim: int = 2) -> "NodeSet":
        groups: dict[str, list] = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                groups.setdefault(row["group"], []).append(
                    [float(row["x1"]), float(row["x2"]), float(row["w"]), float(row["n1"]), float(row["n2"])]
                )
        if "interior" not in groups:
            raise ConfigError(f"{path}: no interior nodes")

        def split(rows):
            a = np.array(rows)
            return a[:, :dim], a[:, 2], a[:, 3:3 + dim]

        x, w, _ = split(groups.pop("interior"))
        bnd = {}
        for name, rows in groups.items():
            bx, bw, bn = split(rows)
            bnd[name] = BoundaryGroup(bx, bw, bn)
        return cls(x, w, bnd)


def uniform_1d(n: int = 50) -> NodeSet:
    """Cell-centred nodes on [0, 1] with equal weights 1/n.

    The end points carry unit-weight boundary groups for point tractions.
    """
    if n < 2:
        raise ConfigError("need at least 2 nodes")
    x = (np.arange(n) + 0.5) / n
    return NodeSet(
        x=x[:, None],
        w=np.full(n, 1.0 / n),
        boundaries={
            "left": BoundaryGroup(np.array([[0.0]]), np.array([1.0]), np.array([[-1.0]])),
            "right": BoundaryGroup(np.array([[1.0]]), np.array([1.0]), np.array([[1.0]])),
        },
    )


def uniform_grid_2d(nx: int = 30, ny: int = 90, L: float = 1.0) -> NodeSet:
    """Cell-centred grid on [0, L] x [0, 3L]; weights are cell areas."""
    if nx < 2 or ny < 2:
        raise ConfigError("need at least 2 cells per direction")
    H = 3.0 * L
    hx, hy = L / nx, H / ny
    xc = (np.arange(nx) + 0.5) * hx
    yc = (np.arange(ny) + 0.5) * hy
    X1, X2 = np.meshgrid(xc, yc)
    x = np.column_stack([X1.ravel(), X2.ravel()])

    def edge(coords, normal, h):
        m = len(coords)
        return BoundaryGroup(coords, np.full(m, h), np.tile(normal, (m, 1)).astype(float))

    return NodeSet(
        x=x,
        w=np.full(len(x), hx * hy),
        boundaries={
            "bottom": edge(np.column_stack([xc, np.zeros(nx)]), [0.0, -1.0], hx),
            "top": edge(np.column_stack([xc, np.full(nx, H)]), [0.0, 1.0], hx),
            "left": edge(np.column_stack([np.zeros(ny), yc]), [-1.0, 0.0], hy),
            "right": edge(np.column_stack([np.full(ny, L), yc]), [1.0, 0.0], hy),
        },
    )


def _quad_area_centroid(p0, p1, p2, p3):
    """Area and centroid of quads given as four (M, 2) corner arrays (CCW)."""
    def tri(a, b, c):
        ar = 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1]))
        return ar, (a + b + c) / 3.0

    a1, c1 = tri(p0, p1, p2)
    a2, c2 = tri(p0, p2, p3)
    area = a1 + a2
    cen = (a1[:, None] * c1 + a2[:, None] * c2) / area[:, None]
    return area, cen


def _radial_grading(n_radial: int, first: float, total: float) -> np.ndarray:
    """Fractions 0 = s_0 < ... < s_n = 1 growing geometrically from a first step ``first``."""
    target = first / total
    if target * n_radial >= 1.0:
        return np.linspace(0.0, 1.0, n_radial + 1)
    f = lambda q: (q - 1.0) / (q**n_radial - 1.0) - target
    q = brentq(f, 1.0 + 1e-12, 10.0)
    return (q ** np.arange(n_radial + 1) - 1.0) / (q**n_radial - 1.0)


def _refine_last(s: np.ndarray, times: int) -> np.ndarray:
    """Split the last interval into cells halving towards the end: 1/2, 1/4, ..., 1/2^k, 1/2^k."""
    if times <= 0:
        return s
    a, b = s[-2], s[-1]
    inner = a + (b - a) * (1.0 - 0.5 ** np.arange(1, times + 1))
    return np.concatenate([s[:-1], inner, [b]])


def plate_with_hole(radius: float = 0.1, side: float = 1.0, resolution: int = 40,
                    edge_refine: int = 3) -> NodeSet:
    """Quarter plate [0, side]^2 minus the disc of ``radius`` at the origin.

    The region is split along the diagonal into two patches. In each patch
    ``resolution`` straight spokes join equally spaced points on the hole
    arc to equally spaced points on the outer edge, and each spoke is cut
    into ``resolution`` radial cells graded geometrically so that cells at
    the hole are roughly square and large cells sit at the outer corner.
    The outermost cell of each spoke is then split ``edge_refine`` times,
    halving towards the outer edge, so no wide unsampled strip lines the
    loaded edge (a network can otherwise hide a displacement jump there
    that earns traction work at no strain-energy cost).
    Nodes are cell centroids, weights are cell areas.
    """
    if radius <= 0 or radius >= side:
        raise ConfigError("need 0 < radius < side")
    if resolution < 2:
        raise ConfigError("resolution must be >= 2")
    if edge_refine < 0:
        raise ConfigError("edge_refine must be >= 0")
    n_t = resolution
    n_r = resolution
    dtheta = 0.25 * np.pi / n_t
    s = _refine_last(_radial_grading(n_r, radius * dtheta, side - radius), edge_refine)

    xs, ws = [], []
    arcs, rights, tops = [], [], []
    for patch in (0, 1):
        # spoke j: arc angle theta_j -> outer edge point
        t = np.arange(n_t + 1) / n_t
        if patch == 0:
            theta = t * 0.25 * np.pi
            outer = np.column_stack([np.full(n_t + 1, side), t * side])
        else:
            theta = 0.25 * np.pi + t * 0.25 * np.pi
            outer = np.column_stack([side * (1.0 - t), np.full(n_t + 1, side)])
        inner = radius * np.column_stack([np.cos(theta), np.sin(theta)])
        # grid[k, j] = point at radial fraction s_k on spoke j
        grid = inner[None, :, :] + s[:, None, None] * (outer - inner)[None, :, :]
        p0 = grid[:-1, :-1].reshape(-1, 2)
        p1 = grid[1:, :-1].reshape(-1, 2)
        p2 = grid[1:, 1:].reshape(-1, 2)
        p3 = grid[:-1, 1:].reshape(-1, 2)
        area, cen = _quad_area_centroid(p0, p1, p2, p3)
        xs.append(cen)
        ws.append(area)

        tm = 0.5 * (theta[:-1] + theta[1:])
        arcs.append(np.column_stack([radius * np.cos(tm), radius * np.sin(tm)]))
        mid = 0.5 * (outer[:-1] + outer[1:])
        seg = np.linalg.norm(outer[1:] - outer[:-1], axis=1)
        (rights if patch == 0 else tops).append((mid, seg))

    x = np.vstack(xs)
    w = np.concatenate(ws)
    arc = np.vstack(arcs)
    arc_n = -arc / np.linalg.norm(arc, axis=1, keepdims=True)
    r_mid, r_len = rights[0]
    t_mid, t_len = tops[0]
    n_edge = resolution
    sym = (np.arange(n_edge) + 0.5) / n_edge * (side - radius) + radius
    sym_w = np.full(n_edge, (side - radius) / n_edge)
    return NodeSet(
        x=x,
        w=w,
        boundaries={
            "hole": BoundaryGroup(arc, np.full(len(arc), radius * dtheta), arc_n),
            "right": BoundaryGroup(r_mid, r_len, np.tile([1.0, 0.0], (len(r_mid), 1))),
            "top": BoundaryGroup(t_mid, t_len, np.tile([0.0, 1.0], (len(t_mid), 1))),
            "left": BoundaryGroup(np.column_stack([np.zeros(n_edge), sym]), sym_w,
                                  np.tile([-1.0, 0.0], (n_edge, 1))),
            "bottom": BoundaryGroup(np.column_stack([sym, np.zeros(n_edge)]), sym_w,
                                    np.tile([0.0, -1.0], (n_edge, 1))),
        },
    )
