"""Discretised energy functional: internal energy minus external work."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .autodiff import Node, dot, value_of
from .network import ConfigError
from .physics import (
    MaterialModel,
    elastic_strain,
    plane_stress_C,
    small_strain,
    strain_energy_density,
    thermal_energy_density,
)
from .sampling import NodeSet


@dataclass
class LoadSpec:
    """External loading and the boundaries whose values are embedded.

    ``tractions`` maps a boundary group to a constant vector or to a
    callable ``(points, normals) -> (M, d)``. ``dirichlet`` lists groups
    whose displacement is fixed by the field transform; they never carry
    work terms, since reaction forces do no work in the embedded setting.
    """

    body_force: Callable | None = None
    tractions: dict = field(default_factory=dict)
    dirichlet: tuple[str, ...] = ()

    def __post_init__(self):
        clash = set(self.tractions) & set(self.dirichlet)
        if clash:
            raise ConfigError(f"groups {sorted(clash)} are both traction and Dirichlet boundaries")


@dataclass
class LossBreakdown:
    elastic: object
    thermal: object
    external: object
    total: object

    def as_floats(self) -> dict[str, float]:
        return {
            "W_elastic": float(value_of(self.elastic)),
            "W_thermal": float(value_of(self.thermal)),
            "W_ext": float(value_of(self.external)),
            "total": float(value_of(self.total)),
        }


def _wsum(w: np.ndarray, a):
    """Weighted node sum that tolerates structurally zero or scalar integrands."""
    if isinstance(a, (int, float)):
        return float(a) * float(np.sum(w))
    if isinstance(a, Node) and a.value.shape != w.shape:
        a = a * np.ones_like(w)
    elif not isinstance(a, Node):
        a = np.broadcast_to(np.asarray(a, dtype=np.float64), w.shape)
    return dot(w, a)


def _displacements(fields: dict, dim: int) -> list:
    return [fields[f"u{i + 1}"] for i in range(dim)]


def _work(forces: np.ndarray, disp: list):
    """sum_i f_i u_i with constant force components."""
    total = 0.0
    for i, u in enumerate(disp):
        fi = forces[..., i]
        if not np.any(fi):
            continue
        term = fi * u.primal
        total = term if isinstance(total, float) else total + term
    return total


def elastic_energy(fields: dict, nodes: NodeSet, material: MaterialModel):
    dim = nodes.dim
    disp = _displacements(fields, dim)
    grad_u = [[u.tangents[j] for j in range(dim)] for u in disp]
    T = fields.get("T")
    eps = small_strain(grad_u)
    eps_el = elastic_strain(eps, None if T is None else T.primal, material)
    E = material.E(nodes.x)
    C = E if dim == 1 else plane_stress_C(E, material.nu)
    return _wsum(nodes.w, strain_energy_density(eps_el, C))


def thermo_coupling_terms(fields: dict, nodes: NodeSet, material: MaterialModel):
    """Thermal energy 0.5 sum w k |grad T|^2 (the thermal-strain coupling lives in
    :func:`elastic_energy` through the elastic strain)."""
    T = fields.get("T")
    if T is None:
        return 0.0
    if material.k is None:
        raise ConfigError("coupled problem needs a conductivity")
    return _wsum(nodes.w, thermal_energy_density(T.tangents, material.k(nodes.x)))


def external_work(fields_at: Callable, interior: dict, nodes: NodeSet, loads: LoadSpec):
    dim = nodes.dim
    total = 0.0
    if loads.body_force is not None:
        f = np.asarray(loads.body_force(nodes.x), dtype=np.float64).reshape(len(nodes), dim)
        total = _wsum(nodes.w, _work(f, _displacements(interior, dim)))
    for name, t in loads.tractions.items():
        if name not in nodes.boundaries:
            raise ConfigError(f"traction group {name!r} missing from node set")
        g = nodes.boundaries[name]
        tv = t(g.x, g.n) if callable(t) else np.broadcast_to(np.asarray(t, dtype=np.float64), g.x.shape)
        bf = fields_at(g.x)
        term = _wsum(g.w, _work(np.asarray(tv), _displacements(bf, dim)))
        total = term if isinstance(total, float) and total == 0.0 else total + term
    return total


def assemble_loss(fields_at: Callable, nodes: NodeSet, material: MaterialModel, loads: LoadSpec) -> LossBreakdown:
    """Energy loss for any field evaluator ``points -> {name: SpatialDual}``.

    The evaluator may be a trainable :class:`~fgmpinn.fields.FieldModel`
    bound to tape leaves (the result is then a tape scalar) or a reference
    solution (plain floats).
    """
    for name in loads.dirichlet:
        if name in loads.tractions:
            raise ConfigError(f"embedded group {name!r} must not carry a traction term")
    interior = fields_at(nodes.x)
    elastic = elastic_energy(interior, nodes, material)
    thermal = thermo_coupling_terms(interior, nodes, material)
    external = external_work(fields_at, interior, nodes, loads)
    total = elastic + thermal - external
    return LossBreakdown(elastic, thermal, external, total)
