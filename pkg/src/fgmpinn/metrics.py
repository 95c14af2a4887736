"""R^2 scoring, supplementary error norms and the R^2 table layout."""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass

import numpy as np

from .problems import CODES, VARIABLES

# minimum R^2 per (problem, variable); absent pairs are reported but not gated
THRESHOLDS: dict[str, dict[str, float]] = {
    "1D-FGM-ELAS-DIRCH": {"u1": 0.999, "e11": 0.9},
    "1D-FGM-ELAS-NEU": {"u1": 0.999, "e11": 0.9},
    "1D-ELAS-BF": {"u1": 0.999, "e11": 0.9},
    "1D-FGM-THERMO-ELAS": {"u1": 0.999, "e11": 0.9, "T": 0.999},
    "KIRSCH": {"u1": 0.99, "u2": 0.985, "s11": 0.9, "s12": 0.9},
    "2D-FGM-ELAS-NEU": {"u1": 0.99, "u2": 0.99},
    "2D-FGM-ELAS-DIRCH": {"u1": 0.99, "u2": 0.99},
    "2D-FGM-THERMO-ELAS": {"u1": 0.99, "u2": 0.99, "T": 0.999},
}


def _pair(true, pred) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(true, dtype=np.float64).reshape(-1)
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.size} reference vs {p.size} predicted values")
    if t.size < 2:
        raise ValueError("R^2 needs at least two values")
    return t, p


def low_variance(true) -> bool:
    t = np.asarray(true, dtype=np.float64).reshape(-1)
    return bool(t.var() < 1e-8 * t.mean() ** 2 + 1e-12)


def r2(true, pred) -> float:
    """1 - SS_res / SS_tot. Negative when ``pred`` does worse than the mean of ``true``."""
    t, p = _pair(true, pred)
    ss_res = float(np.sum((t - p) ** 2))
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else float("-inf")
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class Score:
    r2: float
    mse: float
    max_abs: float
    variance: float
    low_variance: bool

    def as_dict(self) -> dict:
        return asdict(self)


def score(true, pred) -> Score:
    t, p = _pair(true, pred)
    err = t - p
    return Score(
        r2=r2(t, p),
        mse=float(np.mean(err**2)),
        max_abs=float(np.max(np.abs(err))),
        variance=float(t.var()),
        low_variance=low_variance(t),
    )


def score_problem(predicted: dict, reference: dict, variables=None) -> dict[str, Score]:
    """One :class:`Score` per variable present in both field dicts.

    ``variables`` restricts (and orders) the output; every listed variable
    must exist on both sides.
    """
    names = [v for v in VARIABLES if v in predicted and v in reference] if variables is None else list(variables)
    sizes = {np.size(predicted[n]) for n in names if n in predicted} | {np.size(reference[n]) for n in names if n in reference}
    if len(sizes) > 1:
        raise ValueError("predicted and reference fields live on different node sets")
    out = {}
    for name in names:
        if name not in predicted or name not in reference:
            raise ValueError(f"variable {name!r} missing from predicted or reference fields")
        out[name] = score(reference[name], predicted[name])
    return out


def passes(code: str, scores: dict[str, Score]) -> dict[str, bool]:
    """Per-variable pass/fail against :data:`THRESHOLDS`."""
    return {v: scores[v].r2 >= t for v, t in THRESHOLDS.get(code, {}).items() if v in scores}


def format_table(rows: dict[str, dict[str, Score] | None], percent: bool = True) -> str:
    """Plain-text grid: one row per problem, one column per variable, "-" where absent.

    A ``None`` row marks a problem whose run failed.
    """
    header = ["Problem", *VARIABLES, "pass"]
    lines = [header]
    for code in CODES:
        if code not in rows:
            continue
        sc = rows[code]
        if sc is None:
            lines.append([code, *(["ERR"] * len(VARIABLES)), "FAIL"])
            continue
        cells = []
        for v in VARIABLES:
            if v not in sc:
                cells.append("-")
            else:
                val = sc[v].r2 * (100 if percent else 1)
                cells.append(f"{val:.2f}" if percent else f"{val:.4f}")
        ok = all(passes(code, sc).values())
        lines.append([code, *cells, "PASS" if ok else "FAIL"])
    widths = [max(len(r[i]) for r in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths)))
                     for r in lines)


def table_csv(rows: dict[str, dict[str, Score] | None]) -> str:
    """The same grid as CSV with raw R^2 values (empty cell when absent)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["code", *VARIABLES, "pass"])
    for code in CODES:
        if code not in rows:
            continue
        sc = rows[code]
        if sc is None:
            w.writerow([code, *([""] * len(VARIABLES)), "error"])
            continue
        w.writerow([code, *(repr(sc[v].r2) if v in sc else "" for v in VARIABLES),
                    int(all(passes(code, sc).values()))])
    return buf.getvalue()
