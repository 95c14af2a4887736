"""Closed-form solutions of the four 1D benchmarks.

All four live on [0, 1]. Each entry gives displacement ``u`` and its
derivative, plus temperature for the coupled problem; strain and stress
follow from the problem's material model.
"""
from __future__ import annotations

import numpy as np

from ..autodiff import SpatialDual
from ..network import ConfigError


def _dirch(x):
    return (x * x + 2 * x) / 3, (2 * x + 2) / 3


def _neu(x):
    return x + 0.5 * x * x, 1 + x


def _bf(x):
    return 2 * x - 0.5 * x * x, 2 - x


def _thermo(x):
    return x**3 / 9 + 14 * x**2 / 27 + 10 * x / 27, x**2 / 3 + 28 * x / 27 + 10 / 27


def _thermo_T(x):
    return (2 * x + x * x) / 3, (2 + 2 * x) / 3


_SOLUTIONS = {
    "1D-FGM-ELAS-DIRCH": (_dirch, None),
    "1D-FGM-ELAS-NEU": (_neu, None),
    "1D-ELAS-BF": (_bf, None),
    "1D-FGM-THERMO-ELAS": (_thermo, _thermo_T),
}


def analytic_1d(code: str, x) -> dict[str, np.ndarray]:
    """Exact ``u``, ``du`` (and ``T``, ``dT`` for the coupled case) at ``x``.

    ``x`` may be (N,) or (N, 1).
    """
    try:
        u_fn, t_fn = _SOLUTIONS[code]
    except KeyError:
        raise ConfigError(f"no analytic 1D solution for {code!r}") from None
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ConfigError("1D analytic solutions are defined on [0, 1]")
    u, du = u_fn(x)
    out = {"u": u, "du": du}
    if t_fn is not None:
        out["T"], out["dT"] = t_fn(x)
    return out


def analytic_1d_duals(code: str):
    """Field evaluator ``points -> {name: SpatialDual}`` of the exact solution."""
    def fields_at(points):
        sol = analytic_1d(code, points)
        out = {"u1": SpatialDual(sol["u"], [sol["du"]])}
        if "T" in sol:
            out["T"] = SpatialDual(sol["T"], [sol["dT"]])
        return out

    return fields_at
