"""Regression models predicting a subproblem's subsolution cost.

Three kinds share one container:

* ``linear`` - affine map of the standardized summary features;
* ``mlp`` - two ReLU hidden layers on the same features;
* ``set-attention`` - a Transformer encoder over the unordered per-city
  features (post-norm residual blocks, no positional encoding), a per-city
  linear head and a mean over cities.

Targets are standardized with the training mean/std; ``predict`` returns
costs on the original scale.  Gradients are hand-derived and checked against
finite differences in the test-suite.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..rng import stream
from .features import N_SUMMARY, SubproblemData, pad_subproblems, summary_features_padded

KINDS = ("linear", "mlp", "set-attention")
FORMAT = "vrpdelegate-model"
VERSION = 1
LN_EPS = 1e-5
NEG = -1e30


def huber(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean Huber loss (threshold 1) and its gradient w.r.t. ``pred``."""
    e = np.asarray(pred, dtype=np.float64) - target
    a = np.abs(e)
    loss = np.where(a <= 1.0, 0.5 * e * e, a - 0.5)
    return float(loss.mean()), np.clip(e, -1.0, 1.0) / e.size


# --- batches ------------------------------------------------------------------


@dataclass
class Batch:
    """Model-ready inputs: a feature matrix or a padded city tensor with mask."""

    z: np.ndarray | None = None     # (B, 33) raw summary features
    x: np.ndarray | None = None     # (B, n, 3) city features
    mask: np.ndarray | None = None  # (B, n) 1.0 for real cities

    def __len__(self):
        return len(self.z) if self.z is not None else len(self.x)


def pad_cities(sps: Sequence[SubproblemData]) -> tuple[np.ndarray, np.ndarray]:
    xy, q, mask = pad_subproblems(sps)
    return np.concatenate([xy, q[:, :, None]], axis=2), mask.astype(np.float64)


# --- layer helpers -----------------------------------------------------------


def _layernorm(u, g, b):
    mu = u.mean(-1, keepdims=True)
    xc = u - mu
    var = (xc * xc).mean(-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return xhat * g + b, (xhat, inv)


def _layernorm_back(dy, g, cache):
    xhat, inv = cache
    d = xhat.shape[-1]
    dg = (dy * xhat).reshape(-1, d).sum(0)
    db = dy.reshape(-1, d).sum(0)
    dxhat = dy * g
    dx = inv / d * (d * dxhat - dxhat.sum(-1, keepdims=True) - xhat * (dxhat * xhat).sum(-1, keepdims=True))
    return dx, dg, db


# --- model -------------------------------------------------------------------


@dataclass
class RegressionModel:
    kind: str
    arch: dict
    params: dict[str, np.ndarray]
    target_mean: float = 0.0
    target_std: float = 1.0
    feat_mean: np.ndarray | None = None
    feat_std: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    # inputs ----------------------------------------------------------------

    @property
    def uses_summary(self) -> bool:
        return self.kind in ("linear", "mlp")

    def make_batch(self, sps: Sequence[SubproblemData]) -> Batch:
        return self.batch_from_padded(*pad_subproblems(sps))

    def batch_from_padded(self, xy: np.ndarray, q: np.ndarray, mask: np.ndarray) -> Batch:
        if self.uses_summary:
            return Batch(z=summary_features_padded(xy, q, mask))
        return Batch(x=np.concatenate([xy, q[:, :, None]], axis=2), mask=mask.astype(np.float64))

    def _norm_z(self, z):
        if z.shape[1] != N_SUMMARY:
            raise ValueError(f"expected {N_SUMMARY} summary features, got {z.shape[1]}")
        return (z - self.feat_mean) / self.feat_std

    # forward / backward ------------------------------------------------------

    def forward(self, batch: Batch, keep: bool = False):
        """Normalized predictions, plus the activation cache when ``keep``."""
        p = self.params
        if self.kind == "linear":
            zn = self._norm_z(batch.z)
            y = zn @ p["w"] + p["b"][0]
            return (y, {"zn": zn}) if keep else y
        if self.kind == "mlp":
            zn = self._norm_z(batch.z)
            a1 = zn @ p["W1"] + p["b1"]
            h1 = np.maximum(a1, 0.0)
            a2 = h1 @ p["W2"] + p["b2"]
            h2 = np.maximum(a2, 0.0)
            y = h2 @ p["w3"] + p["b3"][0]
            return (y, {"zn": zn, "a1": a1, "h1": h1, "a2": a2, "h2": h2}) if keep else y
        return self._attn_forward(batch, keep)

    def _attn_forward(self, batch: Batch, keep: bool):
        p = self.params
        x, mask = batch.x, batch.mask
        if x.shape[-1] != 3:
            raise ValueError(f"expected 3 city features, got {x.shape[-1]}")
        B, n, _ = x.shape
        h = self.arch["n_heads"]
        d = self.arch["d_model"]
        dh = d // h
        scale = 1.0 / np.sqrt(dh)
        keymask = (mask > 0)[:, None, None, :]
        H = x @ p["We"] + p["be"]
        caches = []
        for l in range(self.arch["n_layers"]):
            P = lambda name: p[f"l{l}.{name}"]  # noqa: E731
            Hin = H
            Q = (H @ P("Wq") + P("bq")).reshape(B, n, h, dh).transpose(0, 2, 1, 3)
            K = (H @ P("Wk") + P("bk")).reshape(B, n, h, dh).transpose(0, 2, 1, 3)
            V = (H @ P("Wv") + P("bv")).reshape(B, n, h, dh).transpose(0, 2, 1, 3)
            S = np.where(keymask, (Q @ K.transpose(0, 1, 3, 2)) * scale, NEG)
            S = S - S.max(-1, keepdims=True)
            A = np.exp(S)
            A /= A.sum(-1, keepdims=True)
            ctx = (A @ V).transpose(0, 2, 1, 3).reshape(B, n, d)
            U = Hin + ctx @ P("Wo") + P("bo")
            H1, ln1 = _layernorm(U, P("g1"), P("c1"))
            Z1 = H1 @ P("W1") + P("b1")
            R = np.maximum(Z1, 0.0)
            U2 = H1 + R @ P("W2") + P("b2")
            H, ln2 = _layernorm(U2, P("g2"), P("c2"))
            if keep:
                caches.append((Hin, Q, K, V, A, ctx, H1, ln1, Z1, R, ln2))
        tok = H @ p["wout"] + p["bout"][0]
        cnt = mask.sum(1)
        y = (tok * mask).sum(1) / cnt
        if keep:
            return y, {"x": x, "mask": mask, "H": H, "cnt": cnt, "layers": caches}
        return y

    def backward(self, dy: np.ndarray, cache) -> dict[str, np.ndarray]:
        p = self.params
        if self.kind == "linear":
            return {"w": cache["zn"].T @ dy, "b": np.array([dy.sum()])}
        if self.kind == "mlp":
            g = {"w3": cache["h2"].T @ dy, "b3": np.array([dy.sum()])}
            da2 = np.outer(dy, p["w3"]) * (cache["a2"] > 0)
            g["W2"] = cache["h1"].T @ da2
            g["b2"] = da2.sum(0)
            da1 = (da2 @ p["W2"].T) * (cache["a1"] > 0)
            g["W1"] = cache["zn"].T @ da1
            g["b1"] = da1.sum(0)
            return g
        return self._attn_backward(dy, cache)

    def _attn_backward(self, dy, cache):
        p = self.params
        h = self.arch["n_heads"]
        d = self.arch["d_model"]
        dh = d // h
        scale = 1.0 / np.sqrt(dh)
        mask, H = cache["mask"], cache["H"]
        B, n = mask.shape
        g = {}
        dtok = dy[:, None] * mask / cache["cnt"][:, None]
        g["wout"] = np.einsum("bn,bnd->d", dtok, H)
        g["bout"] = np.array([dtok.sum()])
        dH = dtok[:, :, None] * p["wout"]
        for l in reversed(range(self.arch["n_layers"])):
            P = lambda name: p[f"l{l}.{name}"]  # noqa: E731
            Hin, Q, K, V, A, ctx, H1, ln1, Z1, R, ln2 = cache["layers"][l]
            dU2, g[f"l{l}.g2"], g[f"l{l}.c2"] = _layernorm_back(dH, P("g2"), ln2)
            g[f"l{l}.W2"] = np.einsum("bnf,bnd->fd", R, dU2)
            g[f"l{l}.b2"] = dU2.sum((0, 1))
            dZ1 = (dU2 @ P("W2").T) * (Z1 > 0)
            g[f"l{l}.W1"] = np.einsum("bnd,bnf->df", H1, dZ1)
            g[f"l{l}.b1"] = dZ1.sum((0, 1))
            dH1 = dU2 + dZ1 @ P("W1").T
            dU, g[f"l{l}.g1"], g[f"l{l}.c1"] = _layernorm_back(dH1, P("g1"), ln1)
            g[f"l{l}.Wo"] = np.einsum("bni,bnj->ij", ctx, dU)
            g[f"l{l}.bo"] = dU.sum((0, 1))
            dctx = (dU @ P("Wo").T).reshape(B, n, h, dh).transpose(0, 2, 1, 3)
            dA = dctx @ V.transpose(0, 1, 3, 2)
            dV = A.transpose(0, 1, 3, 2) @ dctx
            dS = A * (dA - (dA * A).sum(-1, keepdims=True)) * scale
            dQ = dS @ K
            dK = dS.transpose(0, 1, 3, 2) @ Q
            merge = lambda t: t.transpose(0, 2, 1, 3).reshape(B, n, d)  # noqa: E731
            dQ, dK, dV = merge(dQ), merge(dK), merge(dV)
            dHin = dU.copy()
            for name, dX in (("q", dQ), ("k", dK), ("v", dV)):
                g[f"l{l}.W{name}"] = np.einsum("bni,bnj->ij", Hin, dX)
                g[f"l{l}.b{name}"] = dX.sum((0, 1))
                dHin += dX @ P(f"W{name}").T
            dH = dHin
        g["We"] = np.einsum("bni,bnj->ij", cache["x"], dH)
        g["be"] = dH.sum((0, 1))
        return g

    def loss_and_grad(self, batch: Batch, target_norm: np.ndarray):
        y, cache = self.forward(batch, keep=True)
        loss, dy = huber(y, target_norm)
        return loss, self.backward(dy, cache)

    # prediction ------------------------------------------------------------

    def normalize_target(self, t):
        return (np.asarray(t, dtype=np.float64) - self.target_mean) / self.target_std

    def denormalize_target(self, y):
        return np.asarray(y, dtype=np.float64) * self.target_std + self.target_mean

    def predict(self, sps: Sequence[SubproblemData], chunk: int = 256) -> np.ndarray:
        sps = list(sps)
        if not sps:
            return np.zeros(0)
        out = np.empty(len(sps))
        if self.uses_summary:
            out[:] = self.forward(self.make_batch(sps))
        else:
            # group similar sizes to keep padding small
            order = np.argsort([sp.n for sp in sps], kind="stable")
            for s in range(0, len(order), chunk):
                idx = order[s: s + chunk]
                out[idx] = self.forward(self.make_batch([sps[i] for i in idx]))
        return self.denormalize_target(out)

    # persistence -------------------------------------------------------------

    def to_json(self) -> str:
        def enc(a):
            a = np.ascontiguousarray(a, dtype="<f8")
            return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode()}

        doc = {
            "format": FORMAT,
            "version": VERSION,
            "kind": self.kind,
            "arch": self.arch,
            "target": enc(np.array([self.target_mean, self.target_std])),
            "features": None if self.feat_mean is None else {"mean": enc(self.feat_mean), "std": enc(self.feat_std)},
            "params": {k: enc(v) for k, v in self.params.items()},
            "meta": self.meta,
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RegressionModel":
        doc = json.loads(text)
        if doc.get("format") != FORMAT or doc.get("version") != VERSION:
            raise ValueError("not a vrpdelegate model file (or unsupported version)")

        def dec(e):
            return np.frombuffer(base64.b64decode(e["data"]), dtype="<f8").reshape(e["shape"]).astype(np.float64)

        tm, ts = dec(doc["target"])
        feats = doc["features"]
        return cls(
            kind=doc["kind"],
            arch=doc["arch"],
            params={k: dec(v) for k, v in doc["params"].items()},
            target_mean=float(tm),
            target_std=float(ts),
            feat_mean=None if feats is None else dec(feats["mean"]),
            feat_std=None if feats is None else dec(feats["std"]),
            meta=doc.get("meta", {}),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())


def load_model(path) -> RegressionModel:
    with open(path) as fh:
        return RegressionModel.from_json(fh.read())


def init_model(kind: str, seed: int = 0, hidden: int = 64, d_model: int = 32, n_heads: int = 2,
               n_layers: int = 2, d_ff: int = 128) -> RegressionModel:
    """Fresh parameters: scaled normal weights, zero biases, unit layer-norm gains."""
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    rng = stream(seed, "train", 1)

    def w(fan_in, *shape):
        return rng.normal(0.0, np.sqrt(1.0 / fan_in), size=shape)

    if kind == "linear":
        return RegressionModel(kind, {}, {"w": np.zeros(N_SUMMARY), "b": np.zeros(1)})
    if kind == "mlp":
        params = {
            "W1": w(N_SUMMARY, N_SUMMARY, hidden) * np.sqrt(2.0), "b1": np.zeros(hidden),
            "W2": w(hidden, hidden, hidden) * np.sqrt(2.0), "b2": np.zeros(hidden),
            "w3": w(hidden, hidden), "b3": np.zeros(1),
        }
        return RegressionModel(kind, {"hidden": hidden}, params)
    if d_model % n_heads:
        raise ValueError("d_model must be divisible by n_heads")
    params = {"We": w(3, 3, d_model), "be": np.zeros(d_model)}
    for l in range(n_layers):
        for name in ("q", "k", "v", "o"):
            params[f"l{l}.W{name}"] = w(d_model, d_model, d_model)
            params[f"l{l}.b{name}"] = np.zeros(d_model)
        params[f"l{l}.g1"] = np.ones(d_model)
        params[f"l{l}.c1"] = np.zeros(d_model)
        params[f"l{l}.W1"] = w(d_model, d_model, d_ff) * np.sqrt(2.0)
        params[f"l{l}.b1"] = np.zeros(d_ff)
        params[f"l{l}.W2"] = w(d_ff, d_ff, d_model)
        params[f"l{l}.b2"] = np.zeros(d_model)
        params[f"l{l}.g2"] = np.ones(d_model)
        params[f"l{l}.c2"] = np.zeros(d_model)
    params["wout"] = w(d_model, d_model)
    params["bout"] = np.zeros(1)
    arch = {"d_model": d_model, "n_heads": n_heads, "n_layers": n_layers, "d_ff": d_ff}
    return RegressionModel(kind, arch, params)
