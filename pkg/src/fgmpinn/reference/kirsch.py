"""Infinite plate with a circular hole under remote uniaxial tension (plane stress)."""
from __future__ import annotations

import numpy as np

from ..autodiff import SpatialDual
from ..network import ConfigError


def kirsch_analytic(points, far_stress: float = 1.0, radius: float = 0.1,
                    E: float = 1.0, nu: float = 0.3) -> dict[str, np.ndarray]:
    """Classical Kirsch fields at (N, 2) points, tension along x1.

    Returns ``u`` (N, 2), ``stress`` and ``strain`` as Voigt (N, 3) arrays
    with tensor shear strain.
    """
    x = np.atleast_2d(np.asarray(points, dtype=np.float64))
    r = np.hypot(x[:, 0], x[:, 1])
    if np.any(r < radius * (1.0 - 1e-12)):
        raise ConfigError("Kirsch solution requested inside the hole")
    th = np.arctan2(x[:, 1], x[:, 0])
    S, a = far_stress, radius
    q2, q4 = (a / r) ** 2, (a / r) ** 4
    c2, s2 = np.cos(2 * th), np.sin(2 * th)

    srr = 0.5 * S * (1 - q2) + 0.5 * S * (1 - 4 * q2 + 3 * q4) * c2
    stt = 0.5 * S * (1 + q2) - 0.5 * S * (1 + 3 * q4) * c2
    srt = -0.5 * S * (1 + 2 * q2 - 3 * q4) * s2

    c, s = np.cos(th), np.sin(th)
    s11 = srr * c * c + stt * s * s - 2 * srt * s * c
    s22 = srr * s * s + stt * c * c + 2 * srt * s * c
    s12 = (srr - stt) * s * c + srt * (c * c - s * s)

    mu = E / (2 * (1 + nu))
    kappa = (3 - nu) / (1 + nu)
    pre = S / (4 * mu)
    ur = pre * (r * ((kappa - 1) / 2 + c2) + a * a / r * (1 + (1 + kappa) * c2) - a**4 / r**3 * c2)
    ut = pre * ((1 - kappa) * a * a / r - r - a**4 / r**3) * s2
    u1 = ur * c - ut * s
    u2 = ur * s + ut * c

    e11 = (s11 - nu * s22) / E
    e22 = (s22 - nu * s11) / E
    e12 = (1 + nu) * s12 / E
    return {
        "u": np.column_stack([u1, u2]),
        "stress": np.column_stack([s11, s22, s12]),
        "strain": np.column_stack([e11, e22, e12]),
        "polar_stress": np.column_stack([srr, stt, srt]),
    }


def kirsch_duals(far_stress=1.0, radius=0.1, E=1.0, nu=0.3, step: float = 1e-6):
    """Field evaluator ``points -> {"u1", "u2"}`` with central-difference tangents."""
    def fields_at(points):
        x = np.atleast_2d(np.asarray(points, dtype=np.float64))
        u = kirsch_analytic(x, far_stress, radius, E, nu)["u"]
        tang = []
        for j in range(2):
            dx = np.zeros(2)
            dx[j] = step
            up = kirsch_analytic(x + dx, far_stress, radius, E, nu)["u"]
            um = kirsch_analytic(x - dx, far_stress, radius, E, nu)["u"]
            tang.append((up - um) / (2 * step))
        return {
            f"u{i + 1}": SpatialDual(u[:, i], [tang[0][:, i], tang[1][:, i]]) for i in range(2)
        }

    return fields_at
