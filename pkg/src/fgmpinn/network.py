"""Fully connected MLPs evaluated on spatial duals."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .autodiff import ACTIVATIONS, SpatialDual, activate_pair, getitem, matmul


class ConfigError(ValueError):
    """Invalid architecture, problem or run configuration."""


@dataclass
class MlpConfig:
    input_dim: int
    output_dim: int
    hidden: list[int]
    activation: str = "tanh"
    seed: int = 0

    def __post_init__(self):
        self.hidden = [int(h) for h in self.hidden]
        widths = [self.input_dim, *self.hidden, self.output_dim]
        if any(w < 1 for w in widths):
            raise ConfigError(f"all layer widths must be >= 1, got {widths}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")

    @property
    def widths(self) -> list[int]:
        return [self.input_dim, *self.hidden, self.output_dim]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MlpConfig":
        return cls(**d)


@dataclass
class MlpParams:
    """Layer-ordered weights ``W[i]`` of shape (fan_in, fan_out) and biases ``b[i]``."""

    weights: list[np.ndarray]
    biases: list[np.ndarray] = field(default_factory=list)

    def flat(self) -> list[np.ndarray]:
        """Parameters interleaved as W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    @classmethod
    def from_flat(cls, arrays) -> "MlpParams":
        arrays = list(arrays)
        return cls(weights=arrays[0::2], biases=arrays[1::2])

    @property
    def count(self) -> int:
        return sum(a.size for a in self.flat())

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init_params(config: MlpConfig, rng: np.random.Generator | None = None) -> MlpParams:
    """Glorot-uniform weights and zero biases.

    Uses ``config.seed`` unless an explicit generator is passed.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    widths = config.widths
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def forward(config: MlpConfig, params, x: list[SpatialDual], record: list | None = None) -> SpatialDual:
    """Evaluate the network on coordinate duals.

    ``params`` is the interleaved list ``[W0, b0, W1, b1, ...]`` of arrays
    or tape leaves. ``x`` is the output of :func:`dual_lift` on an (N, d)
    batch. Returns one batched dual whose primal and tangents are (N, m).
    Hidden-layer activation values are appended to ``record`` if given.
    """
    if len(x) != config.input_dim:
        raise ConfigError(f"expected {config.input_dim} input coordinates, got {len(x)}")
    if len(params) != 2 * (len(config.hidden) + 1):
        raise ConfigError("parameter list does not match architecture")
    d = x[0].dim
    W, b = params[0], params[1]

    # first layer: inputs are exact coordinates, so tangents are rows of W0
    prim = np.stack([np.broadcast_to(np.asarray(xi.primal, dtype=np.float64), np.shape(x[0].primal))
                     for xi in x], axis=-1)
    if prim.ndim == 1:
        prim = prim[None, :]
    z = matmul(prim, W) + b
    zt = []
    for i in range(d):
        acc = 0.0
        for j, xj in enumerate(x):
            t = xj.tangents[i]
            if isinstance(t, (int, float)) and t == 0.0:
                continue
            row = getitem(W, slice(j, j + 1))
            acc = row if (isinstance(t, (int, float)) and t == 1.0) else acc + t[:, None] * row
        zt.append(acc)

    n_layers = len(config.hidden) + 1
    for layer in range(1, n_layers):
        h, dh = activate_pair(config.activation, z)
        ht = [0.0 if isinstance(t, float) else dh * t for t in zt]
        if record is not None:
            record.append(h.value if hasattr(h, "value") else h)
        W, b = params[2 * layer], params[2 * layer + 1]
        z = matmul(h, W) + b
        zt = [0.0 if isinstance(t, float) else matmul(t, W) for t in ht]
    return SpatialDual(z, zt)


def evaluate(config: MlpConfig, params: MlpParams, points) -> np.ndarray:
    """Plain forward pass returning (N, m) network outputs."""
    from .autodiff import dual_lift

    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return np.asarray(forward(config, params.flat(), dual_lift(pts)).primal)


def save_checkpoint(path, nets: list[tuple[MlpConfig, MlpParams]], meta: dict | None = None) -> None:
    """Write networks as JSON: a config header plus layer-ordered arrays.

    Layout::

        {"format": "fgmpinn-mlp/1", "meta": {...},
         "networks": [{"config": {...},
                       "layers": [{"W": [[...]], "b": [...]}, ...]}, ...]}

    ``W`` is stored as fan_in rows of fan_out values. JSON floats use
    ``repr`` so the round trip is exact.
    """
    doc = {
        "format": "fgmpinn-mlp/1",
        "meta": meta or {},
        "networks": [
            {
                "config": cfg.to_dict(),
                "layers": [{"W": w.tolist(), "b": b.tolist()} for w, b in zip(p.weights, p.biases)],
            }
            for cfg, p in nets
        ],
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path) -> tuple[list[tuple[MlpConfig, MlpParams]], dict]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != "fgmpinn-mlp/1":
        raise ConfigError(f"{path}: not an fgmpinn checkpoint")
    nets = []
    for entry in doc["networks"]:
        cfg = MlpConfig.from_dict(entry["config"])
        params = MlpParams(
            [np.array(layer["W"], dtype=np.float64).reshape(-1, len(layer["b"])) for layer in entry["layers"]],
            [np.array(layer["b"], dtype=np.float64) for layer in entry["layers"]],
        )
        if [w.shape[0] for w in params.weights] + [params.weights[-1].shape[1]] != cfg.widths:
            raise ConfigError(f"{path}: layer shapes disagree with config")
        nets.append((cfg, params))
    return nets, doc.get("meta", {})
