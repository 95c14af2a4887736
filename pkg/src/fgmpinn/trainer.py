"""Full-batch Adam training with loss history and layer diagnostics."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .autodiff import Tape, gradient, value_of
from .fields import FieldModel
from .loss import LossBreakdown, assemble_loss
from .network import ConfigError, save_checkpoint
from .sampling import NodeSet

log = logging.getLogger(__name__)


class NumericalAbort(RuntimeError):
    """Loss or gradient became non-finite during training."""


@dataclass
class TrainConfig:
    epochs: int = 5000
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    stats_every: int = 100
    lr_decay_every: int = 0  # 0 disables step decay
    lr_decay: float = 0.5
    convergence_window: int = 200
    convergence_tol: float = 1e-7
    smoothing: int = 50
    checkpoint_every: int = 0
    checkpoint_dir: str | None = None

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.lr <= 0:
            raise ConfigError("learning rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ConfigError("Adam betas must lie in (0, 1)")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown train options: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params) -> "AdamState":
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adam_step(params, grads, state: AdamState, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update; returns (new params, state)."""
    if len(state.m) != len(params):
        raise ValueError("Adam state does not match parameters")
    state.t += 1
    bc1 = 1.0 - beta1**state.t
    bc2 = 1.0 - beta2**state.t
    new = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * (g * g)
        mhat = state.m[i] / bc1
        vhat = state.v[i] / bc2
        new.append(p - lr * mhat / (np.sqrt(vhat) + eps))
    return new, state


@dataclass
class TrainingTrace:
    history: list[dict] = field(default_factory=list)  # per epoch, LossBreakdown floats
    stats: list[dict] = field(default_factory=list)  # rows: epoch, layer, quantity, mean, std
    final: dict | None = None
    stopped_early: bool = False

    @property
    def losses(self) -> np.ndarray:
        return np.array([h["total"] for h in self.history])

    def stat(self, quantity: str, layer: str | None = None) -> dict[int, tuple[float, float]]:
        """epoch -> (mean, std) for one quantity, pooled over layers unless ``layer`` is given."""
        out: dict[int, list] = {}
        for r in self.stats:
            if r["quantity"] == quantity and (layer is None or r["layer"] == layer):
                out.setdefault(r["epoch"], []).append(r)
        pooled = {}
        for ep, rows in out.items():
            if len(rows) == 1:
                pooled[ep] = (rows[0]["mean"], rows[0]["std"])
            else:
                n = np.array([r["count"] for r in rows], dtype=float)
                mu = np.array([r["mean"] for r in rows])
                sd = np.array([r["std"] for r in rows])
                m = np.sum(n * mu) / n.sum()
                var = np.sum(n * (sd**2 + (mu - m) ** 2)) / n.sum()
                pooled[ep] = (float(m), float(np.sqrt(var)))
        return pooled


def _layer_names(model: FieldModel) -> list[tuple[str, int]]:
    names = []
    for k, cfg in enumerate(model.configs):
        prefix = f"net{k}." if len(model.configs) > 1 else ""
        for layer in range(len(cfg.hidden) + 1):
            names.append((f"{prefix}layer{layer + 1}", layer))
    return names


def _row(epoch, layer, quantity, arr):
    arr = np.asarray(arr)
    return {"epoch": epoch, "layer": layer, "quantity": quantity,
            "mean": float(arr.mean()), "std": float(arr.std()), "count": int(arr.size)}


def layer_stats(model: FieldModel, activations, grads=None, epoch: int = 0) -> list[dict]:
    rows = []
    names = _layer_names(model)
    act_iter = iter(activations)
    for k, cfg in enumerate(model.configs):
        prefix = f"net{k}." if len(model.configs) > 1 else ""
        for layer in range(len(cfg.hidden)):
            rows.append(_row(epoch, f"{prefix}layer{layer + 1}", "activation", next(act_iter)))
    flat = model.flat_params()
    for i, (name, _) in enumerate(names):
        rows.append(_row(epoch, name, "weight", flat[2 * i]))
        rows.append(_row(epoch, name, "bias", flat[2 * i + 1]))
        if grads is not None:
            rows.append(_row(epoch, name, "grad_weight", grads[2 * i]))
            rows.append(_row(epoch, name, "grad_bias", grads[2 * i + 1]))
    return rows


def capture_layer_stats(model: FieldModel, nodes: NodeSet, grads=None, epoch: int = 0) -> list[dict]:
    """Mean/std of hidden activations over all nodes, of weights and biases,
    and (if given) of the loss gradients, one row per layer and quantity."""
    record: list = []
    model(nodes.x, record=record)
    return layer_stats(model, record, grads, epoch)


def loss_and_grad(model: FieldModel, nodes: NodeSet, problem, record: list | None = None):
    tape = Tape()
    leaves = [tape.leaf(p) for p in model.flat_params()]
    calls = {"n": 0}

    def fields_at(points):
        # only the interior evaluation (first call) records activations
        rec = record if calls["n"] == 0 else None
        calls["n"] += 1
        return model(points, flat=leaves, record=rec)

    lb = assemble_loss(fields_at, nodes, problem.material, problem.loads)
    grads = gradient(lb.total, leaves)
    lb = LossBreakdown(*(float(value_of(v)) for v in (lb.elastic, lb.thermal, lb.external, lb.total)))
    tape.release()
    return lb, grads


def evaluate_loss(model: FieldModel, nodes: NodeSet, problem) -> LossBreakdown:
    return assemble_loss(lambda p: model(p), nodes, problem.material, problem.loads)


def gradient_check(model: FieldModel, nodes: NodeSet, problem, seed: int = 0,
                   step: float = 1e-6, directions: int = 2) -> float:
    """Worst relative error between tape gradients and central differences.

    Compares directional derivatives along random parameter directions, which
    exercises every weight at once.
    """
    base = [p.copy() for p in model.flat_params()]
    _, grads = loss_and_grad(model, nodes, problem)
    rng = np.random.default_rng(seed)
    worst = 0.0
    try:
        for _ in range(directions):
            d = [rng.standard_normal(p.shape) for p in base]
            analytic = sum(float(np.sum(g * v)) for g, v in zip(grads, d))
            model.set_flat_params([p + step * v for p, v in zip(base, d)])
            up = float(value_of(evaluate_loss(model, nodes, problem).total))
            model.set_flat_params([p - step * v for p, v in zip(base, d)])
            down = float(value_of(evaluate_loss(model, nodes, problem).total))
            fd = (up - down) / (2 * step)
            worst = max(worst, abs(analytic - fd) / max(abs(fd), abs(analytic), 1e-12))
    finally:
        model.set_flat_params(base)
    return worst


def _converged(losses: list[float], cfg: TrainConfig) -> bool:
    w, s = cfg.convergence_window, cfg.smoothing
    if cfg.convergence_tol <= 0 or len(losses) < w + s:
        return False
    now = np.mean(losses[-s:])
    then = np.mean(losses[-w - s:-w])
    return abs(now - then) / max(abs(now), 1e-12) < cfg.convergence_tol


def train(problem, config: TrainConfig, nodes: NodeSet | None = None,
          model: FieldModel | None = None) -> tuple[FieldModel, TrainingTrace]:
    """Minimise the problem's energy loss with full-batch Adam.

    Raises :class:`NumericalAbort` if the loss or a gradient turns non-finite.
    """
    nodes = problem.build_nodes() if nodes is None else nodes
    model = problem.build_model(config.seed) if model is None else model
    trace = TrainingTrace()
    params = model.flat_params()
    state = AdamState.zeros_like(params)
    lr = config.lr
    n_hidden = sum(len(c.hidden) for c in model.configs)
    losses: list[float] = []

    for epoch in range(config.epochs):
        capture = config.stats_every > 0 and epoch % config.stats_every == 0
        record = [] if capture else None
        lb, grads = loss_and_grad(model, nodes, problem, record)
        entry = lb.as_floats()
        if not np.isfinite(entry["total"]) or not all(np.all(np.isfinite(g)) for g in grads):
            raise NumericalAbort(f"{problem.code}: non-finite loss/gradient at epoch {epoch}")
        trace.history.append({"epoch": epoch, **entry})
        losses.append(entry["total"])
        if capture:
            trace.stats.extend(layer_stats(model, record[:n_hidden], grads, epoch))
        if config.lr_decay_every and epoch > 0 and epoch % config.lr_decay_every == 0:
            lr *= config.lr_decay
        params, state = adam_step(params, grads, state, lr, config.beta1, config.beta2, config.eps)
        model.set_flat_params(params)
        if (config.checkpoint_every and config.checkpoint_dir
                and (epoch + 1) % config.checkpoint_every == 0):
            path = Path(config.checkpoint_dir) / f"checkpoint_{epoch + 1:06d}.json"
            save_checkpoint(path, list(zip(model.configs, model.params)),
                            {"code": problem.code, "epoch": epoch + 1})
        if epoch % 500 == 0:
            log.info("%s epoch %d loss %.6g", problem.code, epoch, entry["total"])
        if _converged(losses, config):
            trace.stopped_early = True
            log.info("%s converged at epoch %d", problem.code, epoch)
            break

    if config.epochs > 0:
        final = evaluate_loss(model, nodes, problem).as_floats()
        if not np.isfinite(final["total"]):
            raise NumericalAbort(f"{problem.code}: non-finite final loss")
        trace.final = final
    return model, trace
