"""Small-strain thermo-elastic constitutive relations.

Strains and stresses travel as tuples: ``(e11,)`` in 1D and the Voigt
triple ``(e11, e22, e12)`` in 2D with *tensor* shear strain. Entries may be
floats, arrays or tape nodes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .network import ConfigError

# weights for the double contraction eps : sigma in Voigt form
_CONTRACTION = {1: (1.0,), 3: (1.0, 1.0, 2.0)}


def _const(value: float) -> Callable:
    return lambda x: np.full(np.shape(x)[:-1] if np.ndim(x) > 1 else np.shape(x), float(value))


@dataclass
class MaterialModel:
    """Spatially varying modulus and conductivity plus thermal constants.

    ``E`` and ``k`` take an (N, d) array of points and return (N,) values.
    """

    E: Callable
    k: Callable | None = None
    nu: float = 0.3
    alpha: float = 0.0
    T0: float = 0.0

    def __post_init__(self):
        if not -1.0 < self.nu < 0.5:
            raise ConfigError(f"Poisson ratio {self.nu} outside (-1, 0.5)")

    @classmethod
    def homogeneous(cls, E: float = 1.0, **kw) -> "MaterialModel":
        return cls(E=_const(E), **kw)


def graded_1d(scale: float = 1.0) -> Callable:
    """scale / (1 + x) along the single coordinate."""
    return lambda x: scale / (1.0 + np.asarray(x, dtype=np.float64)[..., 0])


def graded_x2(scale: float = 1.0) -> Callable:
    """scale / (1 + x2), graded along the second coordinate."""
    return lambda x: scale / (1.0 + np.asarray(x, dtype=np.float64)[..., 1])


def small_strain(grad_u) -> tuple:
    """Symmetric part of the displacement gradient.

    ``grad_u[i][j]`` is du_i/dx_j; returns ``(e11,)`` or ``(e11, e22, e12)``.
    """
    d = len(grad_u)
    if d == 1:
        return (grad_u[0][0],)
    if d == 2:
        return grad_u[0][0], grad_u[1][1], 0.5 * (grad_u[0][1] + grad_u[1][0])
    raise ValueError("only 1D and 2D strain supported")


def elastic_strain(eps: tuple, T, material: MaterialModel) -> tuple:
    """Subtract the isotropic thermal strain alpha (T - T0) from normal components."""
    if material.alpha == 0.0 or T is None:
        return tuple(eps)
    th = material.alpha * (T - material.T0)
    if len(eps) == 1:
        return (eps[0] - th,)
    return eps[0] - th, eps[1] - th, eps[2]


def plane_stress_C(E, nu: float) -> np.ndarray:
    """3x3 plane-stress stiffness for Voigt order (11, 22, 12), tensor shear.

    An array ``E`` gives a result of shape (3, 3, *E.shape).
    """
    if not -1.0 < nu < 0.5:
        raise ConfigError(f"Poisson ratio {nu} outside (-1, 0.5)")
    E = np.asarray(E, dtype=np.float64)
    c = E / (1.0 - nu * nu)
    z = np.zeros_like(E)
    return np.array(
        [
            [c, nu * c, z],
            [nu * c, c, z],
            [z, z, E / (1.0 + nu)],
        ]
    )


def stress(eps: tuple, C) -> tuple:
    """sigma = C eps; ``C`` is a modulus in 1D or a plane-stress matrix in 2D."""
    if len(eps) == 1:
        return (C * eps[0],)
    C = np.asarray(C)
    out = []
    for i in range(3):
        acc = 0.0
        for j in range(3):
            cij = C[i, j]
            if not np.any(cij):
                continue
            term = cij * eps[j]
            acc = term if isinstance(acc, float) and acc == 0.0 else acc + term
        out.append(acc)
    return tuple(out)


def strain_energy_density(eps: tuple, C):
    """0.5 eps : C : eps, i.e. 0.5 (e11 s11 + e22 s22 + 2 e12 s12) in 2D."""
    sig = stress(eps, C)
    total = 0.0
    for m, e, s in zip(_CONTRACTION[len(eps)], eps, sig):
        term = e * s if m == 1.0 else m * (e * s)
        total = term if isinstance(total, float) and total == 0.0 else total + term
    return 0.5 * total


def thermal_energy_density(grad_T, k):
    """0.5 k |grad T|^2."""
    sq = 0.0
    for g in grad_T:
        sq = g * g if isinstance(sq, float) and sq == 0.0 else sq + g * g
    return 0.5 * (k * sq)


def point_state(grad_u, material: MaterialModel, points, T=None) -> dict:
    """Strain, elastic strain and stress at ``points`` from a displacement gradient."""
    eps = small_strain(grad_u)
    eps_el = elastic_strain(eps, T, material)
    E = material.E(points)
    C = E if len(eps) == 1 else plane_stress_C(E, material.nu)
    return {"eps": eps, "eps_el": eps_el, "sigma": stress(eps_el, C), "C": C}
