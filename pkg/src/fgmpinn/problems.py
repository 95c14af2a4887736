"""Problem registry: one JSON config per benchmark, resolved into runnable specs."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from .fields import TRANSFORMS, FieldModel
from .loss import LoadSpec
from .network import ConfigError, MlpConfig
from .physics import MaterialModel, graded_1d, graded_x2
from .sampling import NodeSet, plate_with_hole, uniform_1d, uniform_grid_2d

CODES = (
    "1D-FGM-ELAS-DIRCH",
    "1D-FGM-ELAS-NEU",
    "1D-ELAS-BF",
    "1D-FGM-THERMO-ELAS",
    "KIRSCH",
    "2D-FGM-ELAS-NEU",
    "2D-FGM-ELAS-DIRCH",
    "2D-FGM-THERMO-ELAS",
)

# column order of the R^2 table
VARIABLES = ("u1", "u2", "s11", "s12", "s22", "e11", "e12", "e22", "T")


def default_config(code: str) -> dict:
    if code not in CODES:
        raise ConfigError(f"unknown problem code {code!r}; choose from {', '.join(CODES)}")
    text = resources.files("fgmpinn.configs").joinpath(f"{code}.json").read_text()
    return json.loads(text)


def merge(base: dict, overrides: dict) -> dict:
    """Recursive dict update returning a new dict."""
    out = copy.deepcopy(base)
    for k, v in overrides.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _property(desc, dim: int) -> Callable | None:
    if desc is None:
        return None
    kind = desc.get("kind")
    if kind == "constant":
        value = float(desc["value"])
        return lambda x: np.full(np.asarray(x).shape[0], value)
    if kind == "graded":
        scale = float(desc.get("scale", 1.0))
        return graded_1d(scale) if dim == 1 else graded_x2(scale)
    raise ConfigError(f"unknown material property kind {kind!r}")


@dataclass
class ProblemSpec:
    code: str
    dim: int
    transform: str
    material: MaterialModel
    loads: LoadSpec
    networks: list[MlpConfig]
    node_params: dict
    reference: dict
    variables: tuple[str, ...]
    load_scale: float
    length: float
    train: dict
    config: dict = field(repr=False, default_factory=dict)

    @classmethod
    def from_config(cls, cfg: dict) -> "ProblemSpec":
        code = cfg.get("code")
        if code not in CODES:
            raise ConfigError(f"unknown problem code {code!r}")
        try:
            transform = cfg["transform"]
            if transform not in TRANSFORMS:
                raise ConfigError(f"unknown transform {transform!r}")
            dim = TRANSFORMS[transform].dim
            mat = cfg["material"]
            material = MaterialModel(
                E=_property(mat["E"], dim),
                k=_property(mat.get("k"), dim),
                nu=float(mat.get("nu", 0.3)),
                alpha=float(mat.get("alpha", 0.0)),
                T0=float(mat.get("T0", 0.0)),
            )
            ld = cfg.get("loads", {})
            tractions = {}
            for name, t in ld.get("tractions", {}).items():
                if t == "kirsch":
                    tractions[name] = _kirsch_traction(cfg)
                else:
                    tractions[name] = [float(c) for c in t]
            bf = ld.get("body_force")
            loads = LoadSpec(
                body_force=None if bf is None else _constant_force([float(c) for c in bf]),
                tractions=tractions,
                dirichlet=tuple(ld.get("dirichlet", ())),
            )
            seed = int(cfg.get("seed", 0))
            networks = [MlpConfig(**{**n, "seed": seed}) for n in cfg["networks"]]
            return cls(
                code=code,
                dim=dim,
                transform=transform,
                material=material,
                loads=loads,
                networks=networks,
                node_params=dict(cfg["nodes"]),
                reference=dict(cfg.get("reference", {})),
                variables=tuple(cfg["variables"]),
                load_scale=float(cfg.get("load_scale", 1.0)),
                length=float(cfg.get("geometry", {}).get("length", 1.0)),
                train=dict(cfg.get("train", {})),
                config=copy.deepcopy(cfg),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config for {code}: {exc}") from exc

    def build_nodes(self, **override) -> NodeSet:
        p = {**self.node_params, **override}
        kind = p.pop("kind")
        if kind == "uniform_1d":
            return uniform_1d(int(p["n"]))
        if kind == "grid_2d":
            return uniform_grid_2d(int(p["nx"]), int(p["ny"]), self.length)
        if kind == "plate_with_hole":
            return plate_with_hole(float(p["radius"]), float(p["side"]), int(p["resolution"]),
                                   int(p.get("edge_refine", 3)))
        raise ConfigError(f"unknown node kind {kind!r}")

    def build_model(self, seed: int | None = None) -> FieldModel:
        cfgs = self.networks
        if seed is not None:
            cfgs = [MlpConfig(**{**c.to_dict(), "seed": seed}) for c in cfgs]
        return FieldModel(self.transform, cfgs, length=self.length)

    @property
    def coupled(self) -> bool:
        return "T" in TRANSFORMS[self.transform].outputs


def _constant_force(vec: list[float]) -> Callable:
    v = np.asarray(vec)
    return lambda x: np.tile(v, (np.asarray(x).shape[0], 1))


def _kirsch_traction(cfg: dict) -> Callable:
    from .reference.kirsch import kirsch_analytic

    geo = cfg["nodes"]
    mat = cfg["material"]
    E = float(mat["E"]["value"])
    nu = float(mat.get("nu", 0.3))
    radius = float(geo["radius"])
    far = float(cfg.get("load_scale", 1.0))

    def traction(points, normals):
        s = kirsch_analytic(points, far, radius, E, nu)["stress"]
        s11, s22, s12 = s[:, 0], s[:, 1], s[:, 2]
        n1, n2 = normals[:, 0], normals[:, 1]
        return np.column_stack([s11 * n1 + s12 * n2, s12 * n1 + s22 * n2])

    return traction


def get_problem(code: str, overrides: dict | None = None) -> ProblemSpec:
    cfg = default_config(code)
    if overrides:
        cfg = merge(cfg, overrides)
    return ProblemSpec.from_config(cfg)
