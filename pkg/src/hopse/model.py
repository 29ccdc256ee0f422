"""Per-rank MLP heads over precomputed bundles, with manual backpropagation.

Every learnable map is an :class:`MlpBlock`; a layer computes
``leaky_relu(layer_norm(h @ W + b + h))``. The full model projects each
channel and the initial features per rank, mixes them per rank, mean-pools
each rank, and reads out from the concatenated pooled vectors.
"""

from __future__ import annotations

import json
import struct
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .aggregate import RankFeatureBundle
from .exceptions import Diverged, FormatError, ShapeError
from .validation import bundle_layout, check_bundles, check_targets

__all__ = [
    "LN_EPS",
    "LEAKY_SLOPE",
    "MlpBlock",
    "HopseModel",
    "mlp_forward",
    "forward",
    "loss",
    "grad_check",
    "grad_check_suite",
    "train",
    "save_checkpoint",
    "load_checkpoint",
    "HopseClassifier",
    "HopseRegressor",
]

LN_EPS = 1e-6
LEAKY_SLOPE = 0.01
_CKPT_MAGIC = b"HOPSECKP"
_CKPT_VERSION = 1


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class MlpBlock:
    """``n_layers`` residual layers of width ``width``.

    When ``in_dim != width`` a bias-free linear projection runs first so the
    skip connection is well-typed. LayerNorm has no affine parameters.
    """

    def __init__(self, in_dim: int, width: int, n_layers: int = 2, rng=None):
        if in_dim < 1 or width < 1 or n_layers < 0:
            raise ValueError("in_dim and width must be positive, n_layers non-negative")
        rng = np.random.default_rng(rng)
        self.in_dim = in_dim
        self.width = width
        self.proj = _glorot(rng, in_dim, width) if in_dim != width else None
        self.weights = [_glorot(rng, width, width) for _ in range(n_layers)]
        # nonzero biases keep zero-filled rows off the LayerNorm/LeakyReLU kink at 0
        bound = 1.0 / np.sqrt(width)
        self.biases = [rng.uniform(-bound, bound, size=width) for _ in range(n_layers)]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list[np.ndarray]:
        head = [self.proj] if self.proj is not None else []
        return head + [p for pair in zip(self.weights, self.biases) for p in pair]

    def forward(self, x: np.ndarray):
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeError(f"block expects (n, {self.in_dim}) input, got {x.shape}")
        h = x @ self.proj if self.proj is not None else x
        layers = []
        for w, b in zip(self.weights, self.biases):
            z = h @ w + b + h
            mu = z.mean(axis=1, keepdims=True)
            inv = 1.0 / np.sqrt(z.var(axis=1, keepdims=True) + LN_EPS)
            xhat = (z - mu) * inv
            layers.append((h, xhat, inv))
            h = np.where(xhat > 0, xhat, LEAKY_SLOPE * xhat)
        return h, (x, layers)

    def backward(self, cache, grad: np.ndarray):
        """Return ``(d_input, grads)`` with ``grads`` aligned to :meth:`parameters`."""
        x, layers = cache
        gw, gb = [], []
        for (h, xhat, inv), w in zip(reversed(layers), reversed(self.weights)):
            dn = grad * np.where(xhat > 0, 1.0, LEAKY_SLOPE)
            dz = inv * (
                dn
                - dn.mean(axis=1, keepdims=True)
                - xhat * (dn * xhat).mean(axis=1, keepdims=True)
            )
            gw.append(h.T @ dz)
            gb.append(dz.sum(axis=0))
            grad = dz @ w.T + dz
        gw.reverse()
        gb.reverse()
        grads = [g for pair in zip(gw, gb) for g in pair]
        if self.proj is not None:
            return grad @ self.proj.T, [x.T @ grad] + grads
        return grad, grads


def mlp_forward(block: MlpBlock, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ShapeError("input contains non-finite values")
    return block.forward(x)[0]


class HopseModel:
    """Projection, embedding, mixing, and readout blocks for one bundle layout."""

    def __init__(
        self,
        layout: tuple,
        hidden: int = 16,
        n_layers: int = 2,
        n_outputs: int = 2,
        task: str = "classification",
        seed: int = 0,
    ):
        if task not in ("classification", "regression"):
            raise ValueError(f"unknown task {task!r}")
        self.layout = layout
        self.hidden = hidden
        self.n_layers = n_layers
        self.n_outputs = n_outputs
        self.task = task
        self.seed = seed
        max_rank, channels, x_widths, z_widths = layout
        self.max_rank = max_rank
        self.channels = tuple(channels)
        rng = np.random.default_rng(seed)
        self.proj: dict[tuple[int, str], MlpBlock] = {}
        for r, tag, w in x_widths:
            if w > 0:
                self.proj[(r, tag)] = MlpBlock(w, hidden, n_layers, rng)
        self.embed = {r: MlpBlock(d, hidden, n_layers, rng) for r, d in z_widths}
        self.mix = {}
        for r in range(max_rank + 1):
            n_in = 1 + sum(1 for tag in self.channels if (r, tag) in self.proj)
            self.mix[r] = MlpBlock(hidden * n_in, hidden, n_layers, rng)
        self.readout = MlpBlock(hidden * (max_rank + 1), hidden, n_layers, rng)
        self.head_w = _glorot(rng, hidden, n_outputs)
        self.head_b = np.zeros(n_outputs)

    @classmethod
    def from_bundle(cls, bundle: RankFeatureBundle, **kwargs) -> HopseModel:
        return cls(bundle_layout(bundle), **kwargs)

    def config(self) -> dict:
        return {
            "layout": _layout_to_json(self.layout),
            "hidden": self.hidden,
            "n_layers": self.n_layers,
            "n_outputs": self.n_outputs,
            "task": self.task,
            "seed": self.seed,
        }

    def blocks(self) -> list[MlpBlock]:
        out = [self.proj[key] for key in sorted(self.proj, key=self._proj_order)]
        out += [self.embed[r] for r in sorted(self.embed)]
        out += [self.mix[r] for r in sorted(self.mix)]
        out.append(self.readout)
        return out

    def _proj_order(self, key):
        r, tag = key
        return (r, self.channels.index(tag))

    def parameters(self) -> list[np.ndarray]:
        params = [p for blk in self.blocks() for p in blk.parameters()]
        return params + [self.head_w, self.head_b]

    @property
    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def get_flat(self) -> np.ndarray:
        params = self.parameters()
        return np.concatenate([p.ravel() for p in params]) if params else np.zeros(0)

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.n_parameters:
            raise ShapeError(f"expected {self.n_parameters} parameters, got {flat.size}")
        i = 0
        for p in self.parameters():
            p[...] = flat[i : i + p.size].reshape(p.shape)
            i += p.size

    # forward / backward over a batch of bundles; rows of all bundles are stacked

    def _forward(self, bundles: Sequence[RankFeatureBundle]):
        n_b = len(bundles)
        caches = {}
        pooled, pool_mats, hidden_states = [], [], {}
        for r in range(self.max_rank + 1):
            counts = np.array([b.n_cells(r) for b in bundles])
            z = np.vstack([b.init[r] for b in bundles])
            parts = []
            zh, caches[("embed", r)] = self.embed[r].forward(z)
            parts.append(zh)
            for tag in self.channels:
                if (r, tag) in self.proj:
                    x = np.vstack([b.features[(r, tag)] for b in bundles])
                    xh, caches[("proj", r, tag)] = self.proj[(r, tag)].forward(x)
                    parts.append(xh)
            h, caches[("mix", r)] = self.mix[r].forward(np.hstack(parts))
            hidden_states[r] = h
            seg = np.repeat(np.arange(n_b), counts)
            pool = np.zeros((n_b, h.shape[0]))
            pool[seg, np.arange(h.shape[0])] = 1.0 / np.maximum(counts[seg], 1)
            pool_mats.append(pool)
            pooled.append(pool @ h)
        g, caches["readout"] = self.readout.forward(np.hstack(pooled))
        out = g @ self.head_w + self.head_b
        return out, hidden_states, (caches, pool_mats, g)

    def predict_raw(self, bundles) -> np.ndarray:
        return self._forward(list(bundles))[0]

    def _backward(self, state, d_out: np.ndarray) -> list[np.ndarray]:
        caches, pool_mats, g = state
        grads: dict[int, list[np.ndarray]] = {}
        g_head_w = g.T @ d_out
        g_head_b = d_out.sum(axis=0)
        d_g = d_out @ self.head_w.T
        d_pooled, grads[id(self.readout)] = self.readout.backward(caches["readout"], d_g)
        h = self.hidden
        for r in range(self.max_rank + 1):
            d_h = pool_mats[r].T @ d_pooled[:, r * h : (r + 1) * h]
            d_parts, grads[id(self.mix[r])] = self.mix[r].backward(caches[("mix", r)], d_h)
            _, grads[id(self.embed[r])] = self.embed[r].backward(caches[("embed", r)], d_parts[:, :h])
            col = h
            for tag in self.channels:
                if (r, tag) in self.proj:
                    blk = self.proj[(r, tag)]
                    _, grads[id(blk)] = blk.backward(caches[("proj", r, tag)], d_parts[:, col : col + h])
                    col += h
        flat = [gr for blk in self.blocks() for gr in grads[id(blk)]]
        return flat + [g_head_w, g_head_b]

    def loss_and_grad(self, bundles, targets) -> tuple[float, list[np.ndarray]]:
        out, _, state = self._forward(bundles)
        value, d_out = _batch_loss(out, targets, self.task)
        return value, self._backward(state, d_out)

    def batch_loss(self, bundles, targets) -> float:
        out = self._forward(bundles)[0]
        return _batch_loss(out, targets, self.task)[0]


def _layout_to_json(layout) -> list:
    max_rank, channels, x, z = layout
    return [max_rank, list(channels), [list(t) for t in x], [list(t) for t in z]]


def _layout_from_json(obj) -> tuple:
    max_rank, channels, x, z = obj
    return (max_rank, tuple(channels), tuple(tuple(t) for t in x), tuple(tuple(t) for t in z))


def forward(model: HopseModel, bundle: RankFeatureBundle):
    """Per-rank representations ``{r: H_r}`` and the output vector of one bundle."""
    check_bundles([bundle], model.layout)
    out, hidden_states, _ = model._forward([bundle])
    return hidden_states, out[0]


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _batch_loss(out: np.ndarray, targets: np.ndarray, task: str):
    n = out.shape[0]
    if task == "regression":
        y = np.asarray(targets, dtype=float).reshape(out.shape)
        diff = out - y
        return float(np.mean(diff**2)), 2.0 * diff / diff.size
    labels = np.asarray(targets, dtype=np.intp)
    logp = _log_softmax(out)
    value = -float(logp[np.arange(n), labels].mean())
    d = np.exp(logp)
    d[np.arange(n), labels] -= 1.0
    return value, d / n


def loss(output, target, task: str = "classification") -> float:
    """MSE (regression) or softmax cross-entropy with an integer label (classification)."""
    output = np.atleast_1d(np.asarray(output, dtype=float))
    if task == "regression":
        target = np.atleast_1d(np.asarray(target, dtype=float))
        if target.shape != output.shape:
            raise ShapeError(f"output {output.shape} vs target {target.shape}")
        return float(np.mean((output - target) ** 2))
    if task != "classification":
        raise ValueError(f"unknown task {task!r}")
    label = int(target)
    if not 0 <= label < output.size:
        raise ShapeError(f"label {label} out of range for {output.size} logits")
    return float(-_log_softmax(output)[label])


def grad_check(model: HopseModel, bundles, targets, eps: float = 1e-5) -> float:
    """Max relative gap between analytic and central-difference gradients."""
    bundles = check_bundles(bundles, model.layout)
    params = model.parameters()
    if not params or sum(p.size for p in params) == 0:
        return 0.0
    _, analytic = model.loss_and_grad(bundles, targets)
    worst = 0.0
    for p, g in zip(params, analytic):
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + eps
            up = model.batch_loss(bundles, targets)
            flat_p[i] = orig - eps
            down = model.batch_loss(bundles, targets)
            flat_p[i] = orig
            num = (up - down) / (2 * eps)
            ana = flat_g[i]
            err = abs(ana - num) / max(abs(ana), abs(num), 1e-8)
            worst = max(worst, err)
    return worst


def grad_check_suite(seeds=(0, 1, 2), hidden: int = 6, n_layers: int = 1) -> list[tuple[int, int, float]]:
    """Gradient checks on small seeded models over two clique-lifted graphs.

    Uses every channel and the Mix-1 neighborhoods; returns
    ``(seed, n_parameters, max_relative_error)`` per seed.
    """
    from .aggregate import HopseEncoder
    from .lifting import InputGraph

    graphs = [
        InputGraph.from_edges(4, [(0, 1), (1, 2), (2, 0), (2, 3)]),
        InputGraph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]),
    ]
    encoder = HopseEncoder(neighborhoods="Mix-1", pse="rwse:K=4,lap:i=2,hk:K=3,elstatic").fit()
    bundles = encoder.transform(graphs)
    targets = np.array([0, 1])
    out = []
    for seed in seeds:
        model = HopseModel.from_bundle(bundles[0], hidden=hidden, n_layers=n_layers, seed=seed)
        out.append((seed, model.n_parameters, grad_check(model, bundles, targets)))
    return out


def train(
    model: HopseModel,
    bundles,
    targets,
    epochs: int = 200,
    lr: float = 1e-2,
) -> list[float]:
    """Full-batch gradient descent in place; returns the loss before each step."""
    bundles = check_bundles(bundles, model.layout)
    trace = []
    params = model.parameters()
    for step in range(epochs):
        value, grads = model.loss_and_grad(bundles, targets)
        if not np.isfinite(value):
            raise Diverged(f"loss became {value} at step {step}")
        trace.append(value)
        for p, g in zip(params, grads):
            p -= lr * g
    return trace


def checkpoint_bytes(model: HopseModel) -> bytes:
    head = json.dumps(model.config(), sort_keys=True, separators=(",", ":")).encode()
    body = model.get_flat().astype("<f8").tobytes()
    return _CKPT_MAGIC + struct.pack("<IQ", _CKPT_VERSION, len(head)) + head + body


def model_from_checkpoint_bytes(blob: bytes) -> HopseModel:
    if not blob.startswith(_CKPT_MAGIC):
        raise FormatError("not a checkpoint file")
    version, n = struct.unpack_from("<IQ", blob, len(_CKPT_MAGIC))
    if version != _CKPT_VERSION:
        raise FormatError(f"unsupported checkpoint version {version}")
    start = len(_CKPT_MAGIC) + 12
    cfg = json.loads(blob[start : start + n])
    cfg["layout"] = _layout_from_json(cfg["layout"])
    model = HopseModel(**cfg)
    flat = np.frombuffer(blob[start + n :], dtype="<f8")
    model.set_flat(flat)
    return model


def save_checkpoint(model: HopseModel, path) -> bytes:
    blob = checkpoint_bytes(model)
    Path(path).write_bytes(blob)
    return blob


def load_checkpoint(path) -> HopseModel:
    return model_from_checkpoint_bytes(Path(path).read_bytes())


class _HopseEstimator(BaseEstimator):
    _task = "classification"

    def __init__(self, hidden=16, n_layers=2, epochs=200, lr=1e-2, seed=0):
        self.hidden = hidden
        self.n_layers = n_layers
        self.epochs = epochs
        self.lr = lr
        self.seed = seed

    def _fit(self, bundles, y, n_outputs):
        self.layout_ = bundle_layout(bundles[0])
        self.model_ = HopseModel(
            self.layout_,
            hidden=self.hidden,
            n_layers=self.n_layers,
            n_outputs=n_outputs,
            task=self._task,
            seed=self.seed,
        )
        self.loss_curve_ = train(self.model_, bundles, y, self.epochs, self.lr)
        return self

    def _raw(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        return self.model_.predict_raw(check_bundles(X, self.layout_))


class HopseClassifier(ClassifierMixin, _HopseEstimator):
    """Classifier over :class:`RankFeatureBundle` inputs (see :class:`hopse.HopseEncoder`)."""

    def fit(self, X, y):
        bundles = check_bundles(X)
        y = check_targets(y, len(bundles), "classification")
        self.classes_, encoded = np.unique(y, return_inverse=True)
        return self._fit(bundles, encoded, max(len(self.classes_), 2))

    def predict_proba(self, X) -> np.ndarray:
        return np.exp(_log_softmax(self._raw(X)))

    def predict(self, X) -> np.ndarray:
        raw = self._raw(X)
        return self.classes_[np.argmax(raw, axis=1)]


class HopseRegressor(RegressorMixin, _HopseEstimator):
    _task = "regression"

    def fit(self, X, y):
        bundles = check_bundles(X)
        self._single_output = np.ndim(y) == 1
        y = check_targets(y, len(bundles), "regression")
        return self._fit(bundles, y, y.shape[1])

    def predict(self, X) -> np.ndarray:
        out = self._raw(X)
        return out[:, 0] if self._single_output else out
