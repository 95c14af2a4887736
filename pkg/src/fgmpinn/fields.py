"""Boundary-embedding transforms and the trainable field model.

Each transform is affine in the raw network output ``v`` and written with
plain arithmetic, so it evaluates on floats, arrays and :class:`SpatialDual`
values alike.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .autodiff import SpatialDual, dual_lift
from .network import ConfigError, MlpConfig, MlpParams, forward, init_params


def transform_1d_dirch(x, v):
    """u(0) = 0 and u(1) = 1 pinned; slope left free at both ends."""
    return x + x * (1.0 - x) * v


def transform_1d_neu(x, v):
    """Only u(0) = 0 is pinned; the traction end is free."""
    return x * v


def transform_1d_thermo(x, v1, v2):
    """u and T both pinned to 0 at x = 0 and to 1 at x = 1."""
    return x + x * (1.0 - x) * v1, x + x * (1.0 - x) * v2


def transform_kirsch(x: Sequence, v: Sequence):
    """Symmetry planes: u1 = 0 on x1 = 0 and u2 = 0 on x2 = 0."""
    return x[0] * v[0], x[1] * v[1]


def transform_2d_neu(x: Sequence, v: Sequence):
    """Clamped bottom edge x2 = 0."""
    return x[1] * v[0], x[1] * v[1]


def transform_2d_dirch(x: Sequence, v: Sequence, L: float = 1.0):
    """Clamped bottom; u2 = 1 on the top edge x2 = 3L."""
    h = 3.0 * L
    x2 = x[1]
    return x2 * v[0], x2 / h + (h - x2) * x2 * v[1]


def transform_2d_thermo(x: Sequence, v: Sequence, L: float = 1.0):
    """u = T = 0 at the bottom; u2 = 1 and T = 1 on the top edge."""
    h = 3.0 * L
    x2 = x[1]
    return (
        x2 * v[0],
        x2 / h + x2 * (h - x2) * v[1],
        x2 / h + x2 * (h - x2) * v[2],
    )


@dataclass(frozen=True)
class TransformSpec:
    fn: Callable
    dim: int
    outputs: tuple[str, ...]
    uses_length: bool = False


TRANSFORMS: dict[str, TransformSpec] = {
    "1d_dirch": TransformSpec(lambda x, v: (transform_1d_dirch(x[0], v[0]),), 1, ("u1",)),
    "1d_neu": TransformSpec(lambda x, v: (transform_1d_neu(x[0], v[0]),), 1, ("u1",)),
    "1d_thermo": TransformSpec(lambda x, v: transform_1d_thermo(x[0], v[0], v[1]), 1, ("u1", "T")),
    "kirsch": TransformSpec(transform_kirsch, 2, ("u1", "u2")),
    "2d_neu": TransformSpec(transform_2d_neu, 2, ("u1", "u2")),
    "2d_dirch": TransformSpec(transform_2d_dirch, 2, ("u1", "u2"), uses_length=True),
    "2d_thermo": TransformSpec(transform_2d_thermo, 2, ("u1", "u2", "T"), uses_length=True),
}


def apply_transform(transform: str, x: Sequence, v: Sequence, L: float = 1.0) -> dict:
    spec = TRANSFORMS[transform]
    out = spec.fn(x, v, L) if spec.uses_length else spec.fn(x, v)
    return dict(zip(spec.outputs, out))


@dataclass
class FieldModel:
    """Networks plus the transform that turns their outputs into u (and T).

    Several networks are concatenated in order to form the raw output
    vector; the 1D thermo problem uses one network for u and one for T.
    """

    transform: str
    configs: list[MlpConfig]
    params: list[MlpParams] = field(default_factory=list)
    length: float = 1.0

    def __post_init__(self):
        if self.transform not in TRANSFORMS:
            raise ConfigError(f"unknown transform {self.transform!r}")
        spec = TRANSFORMS[self.transform]
        n_out = sum(c.output_dim for c in self.configs)
        if n_out != len(spec.outputs):
            raise ConfigError(
                f"transform {self.transform} needs {len(spec.outputs)} raw outputs, networks give {n_out}"
            )
        if any(c.input_dim != spec.dim for c in self.configs):
            raise ConfigError("network input width must equal the spatial dimension")
        if not self.params:
            rng = np.random.default_rng(self.configs[0].seed)
            self.params = [init_params(c, rng) for c in self.configs]

    @property
    def outputs(self) -> tuple[str, ...]:
        return TRANSFORMS[self.transform].outputs

    @property
    def dim(self) -> int:
        return TRANSFORMS[self.transform].dim

    def flat_params(self) -> list[np.ndarray]:
        out = []
        for p in self.params:
            out.extend(p.flat())
        return out

    def set_flat_params(self, arrays) -> None:
        arrays = list(arrays)
        new = []
        for p in self.params:
            k = len(p.flat())
            new.append(MlpParams.from_flat(arrays[:k]))
            arrays = arrays[k:]
        self.params = new

    def raw(self, x: list[SpatialDual], flat=None, record: list | None = None) -> list[SpatialDual]:
        """Raw network outputs, one dual per output component."""
        flat = self.flat_params() if flat is None else list(flat)
        v = []
        for cfg in self.configs:
            k = 2 * (len(cfg.hidden) + 1)
            out = forward(cfg, flat[:k], x, record=record)
            flat = flat[k:]
            v.extend(out.col(j) for j in range(cfg.output_dim))
        return v

    def __call__(self, points, flat=None, record: list | None = None) -> dict[str, SpatialDual]:
        """Fields at ``points`` (N, d) as duals keyed by output name."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        x = dual_lift(pts)
        return apply_transform(self.transform, x, self.raw(x, flat, record), self.length)

    def values(self, points) -> dict[str, np.ndarray]:
        return {k: np.asarray(d.primal) for k, d in self(points).items()}


def homogeneous_part(transform: str, x: Sequence, v: Sequence, L: float = 1.0) -> dict:
    """The part of the transform proportional to ``v``; zero on embedded boundaries."""
    full = apply_transform(transform, x, v, L)
    zero = apply_transform(transform, x, [0.0 * vi if isinstance(vi, SpatialDual) else 0.0 for vi in v], L)
    return {k: full[k] - zero[k] for k in full}
