"""Acceptance suite, one test per criterion.

Each test records a PASS/FAIL line that conftest prints in the terminal
summary. Training runs use the shipped default configurations and are
cached so criteria sharing a problem train it once.
"""
from __future__ import annotations

import functools
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE

from fgmpinn.autodiff import dual_lift
from fgmpinn.cli import EXIT_ACCEPTANCE, EXIT_OK, main, resolve_config, run_problem
from fgmpinn.fields import homogeneous_part
from fgmpinn.loss import assemble_loss
from fgmpinn.metrics import THRESHOLDS
from fgmpinn.problems import CODES, ProblemSpec, get_problem
from fgmpinn.reference import analytic_1d_duals, fem_solve, kirsch_duals
from fgmpinn.reference.fem import RectMesh, solve_elastic, solve_heat
from fgmpinn.solution import predict
from fgmpinn.trainer import gradient_check

pytestmark = pytest.mark.slow

CODES_1D = ["1D-FGM-ELAS-DIRCH", "1D-FGM-ELAS-NEU", "1D-ELAS-BF", "1D-FGM-THERMO-ELAS"]
CODES_2D = ["2D-FGM-ELAS-DIRCH", "2D-FGM-ELAS-NEU", "2D-FGM-THERMO-ELAS"]


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


@functools.lru_cache(maxsize=None)
def trained(code: str):
    """(report, trace, model, problem, seconds) of a default-configuration run."""
    cfg = resolve_config(code)
    start = time.perf_counter()
    report, trace, model = run_problem(cfg, None)
    return report, trace, model, ProblemSpec.from_config(cfg), time.perf_counter() - start


# 1 ------------------------------------------------------------------------

def test_c01_gradient_correctness():
    start = time.perf_counter()
    worst = {}
    for code in CODES:
        pb = get_problem(code)
        nodes = pb.build_nodes()
        worst[code] = max(gradient_check(pb.build_model(seed), nodes, pb, seed=seed, directions=3)
                          for seed in range(3))
    seconds = time.perf_counter() - start
    bad = {c: e for c, e in worst.items() if not e <= 1e-5}
    ok = not bad and seconds < 120
    record(1, ok, f"worst relative error {max(worst.values()):.2e} over 8 problems x 3 seeds (tol 1e-5), "
                  f"{seconds:.0f} s (limit 120 s)")
    assert ok


# 2 ------------------------------------------------------------------------

PLATEAUS = {"1D-FGM-ELAS-DIRCH": 1 / 3, "1D-FGM-ELAS-NEU": -0.75, "1D-ELAS-BF": -7 / 6}


def test_c02_analytic_loss_plateaus():
    rel, seconds = {}, {}
    for code, target in PLATEAUS.items():
        _, trace, _, _, seconds[code] = trained(code)
        rel[code] = abs(trace.final["total"] - target) / abs(target)
    ok = all(r <= 5e-3 for r in rel.values()) and max(seconds.values()) < 300
    record(2, ok, "relative loss error " + ", ".join(f"{c} {r:.1e}" for c, r in rel.items())
           + f" (tol 0.5%), slowest {max(seconds.values()):.0f} s (limit 300 s)")
    assert ok


# 3 ------------------------------------------------------------------------

PRIMARY = ("u1", "u2", "T")


def _gate(code, variables):
    scores = trained(code)[0].scores
    th = THRESHOLDS[code]
    return {v: (scores[v].r2, th[v]) for v in variables if v in th}


def test_c03_primary_variable_accuracy():
    lines, ok = [], True
    for code in CODES:
        for v, (r2, need) in _gate(code, PRIMARY).items():
            ok &= r2 >= need
            if r2 < need:
                lines.append(f"{code} {v} {r2:.4f} < {need}")
    worst = min(r2 - need for c in CODES for r2, need in _gate(c, PRIMARY).values())
    record(3, ok, "all u/T R2 above thresholds" if ok else "; ".join(lines))
    print(f"smallest margin {worst:+.4f}")
    assert ok


# 4 ------------------------------------------------------------------------

def test_c04_secondary_variable_accuracy():
    failures = []
    for code in CODES_1D + ["KIRSCH"]:
        for v, (r2, need) in _gate(code, ("e11", "s11", "s12")).items():
            if r2 < need:
                failures.append(f"{code} {v} {r2:.4f} < {need}")
    # rows that may be negative: 1D stresses and sigma22 in the 2D plates
    for code in CODES_1D + CODES_2D:
        report, _, _, pb, _ = trained(code)
        var = "s11" if code in CODES_1D else "s22"
        s = report.scores[var]
        bound = 0.1 * pb.load_scale
        if not (s.low_variance or s.max_abs <= bound):
            failures.append(f"{code} {var} max|err| {s.max_abs:.3g} > {bound:.3g} and not low-variance")
    record(4, not failures, "strain/stress rows meet their gates" if not failures else "; ".join(failures))
    assert not failures


# 5 ------------------------------------------------------------------------

def test_c05_kirsch_plateau():
    _, trace, model, pb, _ = trained("KIRSCH")
    # loss after 2500 updates; the default run continues past it with a halved rate
    final = trace.history[2500]["total"] if len(trace.history) > 2500 else trace.final["total"]
    a = pb.node_params["radius"]
    k = predict(model, pb, [[0.0, a]])["s11"][0] / pb.load_scale
    soft = abs(final - (-0.512)) <= 0.05
    hard = final < 0 and abs(k - 3.0) <= 0.15 * 3.0
    record(5, soft or hard,
           f"loss after 2500 epochs {final:.5f} (target -0.512 +- 0.05: {'ok' if soft else 'miss'}); "
           f"sigma11/S at (0, a) = {k:.3f} (3 +- 15%: {'ok' if hard else 'miss'})")
    assert soft or hard


# 6 ------------------------------------------------------------------------

# prescribed data: (group of boundary points, field, value)
def _dirichlet_points(code):
    if code.startswith("1D"):
        left = [(np.array([[0.0]]), "u1", 0.0)]
        if code == "1D-FGM-ELAS-DIRCH":
            return left + [(np.array([[1.0]]), "u1", 1.0)]
        if code == "1D-FGM-THERMO-ELAS":
            return left + [(np.array([[1.0]]), "u1", 1.0), (np.array([[0.0]]), "T", 0.0),
                           (np.array([[1.0]]), "T", 1.0)]
        return left
    if code == "KIRSCH":
        s = np.linspace(0.1, 1.0, 23)
        return [(np.column_stack([np.zeros_like(s), s]), "u1", 0.0),
                (np.column_stack([s, np.zeros_like(s)]), "u2", 0.0)]
    s = np.linspace(0.0, 1.0, 17)
    bottom = np.column_stack([s, np.zeros_like(s)])
    top = np.column_stack([s, np.full_like(s, 3.0)])
    out = [(bottom, "u1", 0.0), (bottom, "u2", 0.0)]
    if code != "2D-FGM-ELAS-NEU":
        out.append((top, "u2", 1.0))
    if code == "2D-FGM-THERMO-ELAS":
        out += [(bottom, "T", 0.0), (top, "T", 1.0)]
    return out


def test_c06_dirichlet_embedding_exactness():
    worst = 0.0
    rng = np.random.default_rng(2024)
    for code in CODES:
        pb = get_problem(code)
        model = pb.build_model(0)
        shapes = [p.shape for p in model.flat_params()]
        checks = _dirichlet_points(code)
        pts = np.vstack([p for p, _, _ in checks])
        for _ in range(1000):
            model.set_flat_params([rng.normal(0.0, 2.0, s) for s in shapes])
            vals = model.values(pts)
            i = 0
            for p, name, value in checks:
                worst = max(worst, float(np.max(np.abs(vals[name][i:i + len(p)] - value))))
                i += len(p)
    record(6, worst <= 1e-14, f"max boundary deviation {worst:.1e} over 1000 draws x 8 problems (tol 1e-14)")
    assert worst <= 1e-14


# 7 ------------------------------------------------------------------------

def _const(v):
    return lambda x: np.full(len(x), v)


def test_c07_fem_oracle_validity():
    # patch test: a linear field prescribed on the boundary is reproduced exactly
    mesh = RectMesh(5, 7, 2.0, 3.0)
    A = np.array([[0.01, -0.02], [0.03, 0.015]])
    exact = mesh.coords() @ A.T
    fixed = {}
    for edge in ("bottom", "top", "left", "right"):
        for n in mesh.edge_nodes(edge):
            fixed[2 * int(n)], fixed[2 * int(n) + 1] = exact[n]
    patch = np.max(np.abs(solve_elastic(mesh, _const(1.7), 0.3, fixed).u - exact))
    T = solve_heat(RectMesh(3, 9, 1.0, 3.0), _const(4.0), {"bottom": 0.0, "top": 1.0})
    patch = max(patch, np.max(np.abs(T - RectMesh(3, 9, 1.0, 3.0).coords()[:, 1] / 3)))

    conv, resid = 0.0, 0.0
    for code in CODES_2D:
        coarse, fine = fem_solve(code, 20, 60), fem_solve(code, 40, 120)
        s = fine.sample(coarse.mesh.coords())
        u_f = np.column_stack([s["u1"], s["u2"]])
        conv = max(conv, np.linalg.norm(coarse.u - u_f) / np.linalg.norm(u_f))
        # out-of-balance force at unconstrained dofs
        m = fine.mesh
        fixed_dofs = set()
        for n in m.edge_nodes("bottom"):
            fixed_dofs |= {2 * int(n), 2 * int(n) + 1}
        if code != "2D-FGM-ELAS-NEU":
            fixed_dofs |= {2 * int(n) + 1 for n in m.edge_nodes("top")}
        free = np.setdiff1d(np.arange(2 * m.n_nodes), sorted(fixed_dofs))
        resid = max(resid, np.max(np.abs(fine.reactions[free])))
        if code == "2D-FGM-ELAS-NEU":
            # bottom reaction balances the applied edge load
            reaction = fine.reactions.reshape(-1, 2)[m.edge_nodes("bottom")].sum(axis=0)
            resid = max(resid, np.max(np.abs(reaction + fine.external.reshape(-1, 2).sum(axis=0))))
    ok = patch <= 1e-10 and conv < 5e-3 and resid <= 1e-8
    record(7, ok, f"patch error {patch:.1e} (1e-10), 2x refinement change {conv:.2e} (5e-3), "
                  f"equilibrium residual {resid:.1e} (1e-8)")
    assert ok


# 8 ------------------------------------------------------------------------

def _reference_evaluator(code, pb):
    if code.startswith("1D"):
        return analytic_1d_duals(code)
    if code == "KIRSCH":
        return kirsch_duals(pb.load_scale, pb.node_params["radius"],
                            pb.material.E(np.zeros((1, 2)))[0], pb.material.nu)
    return fem_solve(pb, 40, 120).duals


def _perturbed(base, model, transform, length, scale):
    def fields_at(points):
        out = base(points)
        x = dual_lift(np.asarray(points, dtype=np.float64))
        h = homogeneous_part(transform, x, model.raw(x), length)
        return {k: out[k] + scale[k] * h[k] for k in out}
    return fields_at


def test_c08_energy_minimality():
    lowest_gap = {}
    for code in CODES:
        pb = get_problem(code)
        nodes = pb.build_nodes()
        base = _reference_evaluator(code, pb)
        ref_loss = assemble_loss(base, nodes, pb.material, pb.loads).as_floats()["total"]
        ref_vals = {k: d.primal for k, d in base(nodes.x).items()}
        gaps = []
        for seed in range(100):
            model = pb.build_model(1000 + seed)
            x = dual_lift(nodes.x)
            h = {k: d.primal for k, d in homogeneous_part(pb.transform, x, model.raw(x), model.length).items()}
            # perturbation amplitude: 5% of the field's RMS
            scale = {k: 0.05 * np.sqrt(np.mean(ref_vals[k] ** 2)) / max(np.sqrt(np.mean(h[k] ** 2)), 1e-300)
                     for k in ref_vals}
            pert = _perturbed(base, model, pb.transform, model.length, scale)
            gaps.append(assemble_loss(pert, nodes, pb.material, pb.loads).as_floats()["total"] - ref_loss)
        lowest_gap[code] = min(gaps)
    bad = [c for c, g in lowest_gap.items() if not g > 0]
    record(8, not bad, "smallest loss increase " + ", ".join(f"{c} {g:.1e}" for c, g in lowest_gap.items()))
    assert not bad


# 9 ------------------------------------------------------------------------

def test_c09_kirsch_diagnostics():
    trace = trained("KIRSCH")[1]
    layers = {r["layer"] for r in trace.stats}
    quantities = {r["quantity"] for r in trace.stats}
    grad = trace.stat("grad_weight")
    sd100, sd2000 = grad[100][1], grad[2000][1]
    ok = {"activation", "weight", "grad_weight"} <= quantities and len(layers) >= 3 and sd2000 < sd100
    record(9, ok, f"{len(layers)} layers, {sorted(quantities)}; grad std epoch 100 {sd100:.2e} -> 2000 {sd2000:.2e}")
    assert ok


# 10 -----------------------------------------------------------------------

ARTIFACTS = ["config.json", "loss.csv", "diagnostics.csv", "fields.csv", "scores.csv", "model.json"]


def test_c10_determinism(tmp_path):
    diffs = []
    for code, epochs in [("1D-FGM-THERMO-ELAS", 200), ("KIRSCH", 20), ("2D-FGM-THERMO-ELAS", 50)]:
        args = ["run", code, "--epochs", str(epochs), "--seed", "7", "--no-plots"]
        small = ["--set", "nodes.resolution=12"] if code == "KIRSCH" else []
        if code.startswith("2D"):
            small = ["--set", "nodes.nx=6", "--set", "nodes.ny=18"]
        rc = [main(args + small + ["--output", str(tmp_path / tag)]) for tag in ("a", "b")]
        assert set(rc) <= {EXIT_OK, EXIT_ACCEPTANCE} and rc[0] == rc[1]
        for name in ARTIFACTS:
            if (tmp_path / "a" / code / name).read_bytes() != (tmp_path / "b" / code / name).read_bytes():
                diffs.append(f"{code}/{name}")
    record(10, not diffs, "repeated seeded runs byte-identical" if not diffs else "differ: " + ", ".join(diffs))
    assert not diffs
