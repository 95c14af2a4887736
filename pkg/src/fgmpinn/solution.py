"""Predicted and reference fields on a node set, and their comparison."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fields import FieldModel
from .metrics import Score, score_problem
from .network import ConfigError
from .physics import point_state
from .problems import VARIABLES, ProblemSpec

_VOIGT = ("11", "22", "12")


def _state_fields(points, grad_u, T, material) -> dict[str, np.ndarray]:
    st = point_state(grad_u, material, points, T)
    out = {}
    names = _VOIGT[: len(st["eps_el"])]
    for name, e, s in zip(names, st["eps_el"], st["sigma"]):
        out["e" + name] = np.asarray(e, dtype=np.float64)
        out["s" + name] = np.asarray(s, dtype=np.float64)
    return out


def predict(model: FieldModel, problem: ProblemSpec, points) -> dict[str, np.ndarray]:
    """Displacement, temperature, elastic strain and stress from the network.

    Derivatives come from the same forward-mode duals the loss uses.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != problem.dim:
        pts = pts.reshape(-1, problem.dim)
    f = model(pts)
    dim = problem.dim
    disp = [f[f"u{i + 1}"] for i in range(dim)]
    grad_u = [[np.asarray(u.tangents[j], dtype=np.float64) for j in range(dim)] for u in disp]
    T = np.asarray(f["T"].primal, dtype=np.float64) if "T" in f else None
    out = {f"u{i + 1}": np.asarray(u.primal, dtype=np.float64) for i, u in enumerate(disp)}
    if T is not None:
        out["T"] = T
    out.update(_state_fields(pts, grad_u, T, problem.material))
    return out


def reference_fields(problem: ProblemSpec, points, fem_resolution: tuple[int, int] | None = None):
    """Ground-truth fields at ``points`` and a provenance tag."""
    from .reference import analytic_1d, fem_solve, kirsch_analytic

    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    kind = problem.reference.get("kind")
    if kind == "analytic":
        sol = analytic_1d(problem.code, pts[:, 0])
        T = sol.get("T")
        out = {"u1": sol["u"]}
        if T is not None:
            out["T"] = T
        out.update(_state_fields(pts, [[sol["du"]]], T, problem.material))
        return out, "analytical"
    if kind == "kirsch":
        mat = problem.config["material"]
        sol = kirsch_analytic(pts, problem.load_scale, float(problem.node_params["radius"]),
                              float(mat["E"]["value"]), problem.material.nu)
        out = {"u1": sol["u"][:, 0], "u2": sol["u"][:, 1]}
        for k, name in enumerate(_VOIGT):
            out["e" + name] = sol["strain"][:, k]
            out["s" + name] = sol["stress"][:, k]
        return out, "analytical"
    if kind == "fem":
        nx, ny = fem_resolution or (int(problem.reference.get("nx", 40)), int(problem.reference.get("ny", 120)))
        return fem_solve(problem, nx, ny).sample(pts), "fem-oracle"
    raise ConfigError(f"unknown reference kind {kind!r}")


def comparison_mask(problem: ProblemSpec, points) -> np.ndarray:
    """Nodes included in scoring: all, or those within ``compare_radius`` of the origin."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    radius = problem.reference.get("compare_radius")
    if radius is None:
        return np.ones(len(pts), dtype=bool)
    return np.hypot(pts[:, 0], pts[:, 1]) <= float(radius)


@dataclass
class SolutionReport:
    code: str
    points: np.ndarray
    predicted: dict[str, np.ndarray]
    reference: dict[str, np.ndarray]
    provenance: str
    mask: np.ndarray
    scores: dict[str, Score] = field(default_factory=dict)

    @property
    def variables(self) -> list[str]:
        return [v for v in VARIABLES if v in self.predicted and v in self.reference]

    def fields_csv(self, path) -> None:
        """Columns: x1[, x2], scored, then ``<var>_pred``, ``<var>_ref`` per variable."""
        dim = self.points.shape[1]
        cols = [f"x{i + 1}" for i in range(dim)] + ["scored"]
        for v in self.variables:
            cols += [f"{v}_pred", f"{v}_ref"]
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for n in range(len(self.points)):
                row = [repr(float(c)) for c in self.points[n]] + [int(self.mask[n])]
                for v in self.variables:
                    row += [repr(float(self.predicted[v][n])), repr(float(self.reference[v][n]))]
                w.writerow(row)

    def scores_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["variable", "r2", "mse", "max_abs", "variance", "low_variance"])
            for v, s in self.scores.items():
                w.writerow([v, repr(s.r2), repr(s.mse), repr(s.max_abs), repr(s.variance), int(s.low_variance)])


def evaluate_solution(model: FieldModel, problem: ProblemSpec, nodes, reference=None) -> SolutionReport:
    """Predict on the node set, compare with the oracle and score each table variable.

    ``reference`` may supply precomputed (fields, provenance) for the same nodes.
    """
    pts = nodes.x
    pred = predict(model, problem, pts)
    ref, prov = reference if reference is not None else reference_fields(problem, pts)
    for name, arr in ref.items():
        if np.shape(arr)[0] != len(pts):
            raise ValueError(f"reference field {name!r} does not match the node set")
    mask = comparison_mask(problem, pts)
    variables = [v for v in problem.variables if v in pred and v in ref]
    scores = score_problem({v: pred[v][mask] for v in variables},
                           {v: ref[v][mask] for v in variables}, variables)
    return SolutionReport(problem.code, pts, pred, ref, prov, mask, scores)
