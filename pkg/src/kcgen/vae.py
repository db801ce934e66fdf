"""Variational autoencoder over context-augmented subtree representations.

One tanh hidden layer on each side, diagonal Gaussian posterior, squared
error reconstruction, and the reparameterization trick. Gradients are
hand-derived and finite-difference checked in the test suite. Inference
uses the posterior mean only, so downstream KC IDs are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import model_io


@dataclass
class VaeHyperparams:
    d_in: int = 64
    d_hidden: int = 64
    d_z: int = 16
    beta: float = 1.0
    learning_rate: float = 0.01
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0

    def to_dict(self):
        return {
            "d_in": self.d_in,
            "d_hidden": self.d_hidden,
            "d_z": self.d_z,
            "beta": self.beta,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }


@dataclass
class VaeModel:
    params: dict[str, np.ndarray]
    hyperparams: VaeHyperparams
    loss_trace: list[float] = field(default_factory=list)

    def save(self, path):
        model_io.save_artifact(
            path,
            kind="vae",
            meta={"hyperparams": self.hyperparams.to_dict()},
            tensors=self.params,
        )

    @classmethod
    def load(cls, path):
        meta, tensors, _ = model_io.load_artifact(path, expect_kind="vae")
        return cls(params=tensors, hyperparams=VaeHyperparams(**meta["hyperparams"]))


def init_params(hp: VaeHyperparams, rng: np.random.Generator):
    def mat(rows, cols):
        return rng.normal(0.0, 1.0 / np.sqrt(cols), (rows, cols))

    return {
        "We1": mat(hp.d_hidden, hp.d_in),
        "be1": np.zeros(hp.d_hidden),
        "Wm": mat(hp.d_z, hp.d_hidden),
        "bm": np.zeros(hp.d_z),
        "Wv": mat(hp.d_z, hp.d_hidden),
        "bv": np.zeros(hp.d_z),
        "Wd1": mat(hp.d_hidden, hp.d_z),
        "bd1": np.zeros(hp.d_hidden),
        "Wd2": mat(hp.d_in, hp.d_hidden),
        "bd2": np.zeros(hp.d_in),
    }


def kl_to_standard_normal(mu: np.ndarray, logvar: np.ndarray) -> float:
    """KL(N(mu, diag(exp(logvar))) || N(0, I)) summed over dimensions."""
    return float(0.5 * np.sum(np.exp(logvar) + mu * mu - 1.0 - logvar))


def loss_and_grads(params, x: np.ndarray, eps: np.ndarray, beta: float):
    """Per-sample mean of [0.5 ||x_hat - x||^2 + beta * KL], with grads.

    x, eps: (B, d_in) and (B, d_z). eps is the reparameterization noise,
    passed explicitly so gradient checks can hold it fixed.
    """
    B = x.shape[0]
    We1, be1 = params["We1"], params["be1"]
    Wm, bm, Wv, bv = params["Wm"], params["bm"], params["Wv"], params["bv"]
    Wd1, bd1, Wd2, bd2 = params["Wd1"], params["bd1"], params["Wd2"], params["bd2"]

    he = np.tanh(x @ We1.T + be1)  # (B, H)
    mu = he @ Wm.T + bm  # (B, Z)
    logvar = he @ Wv.T + bv
    std = np.exp(0.5 * logvar)
    z = mu + std * eps
    hd = np.tanh(z @ Wd1.T + bd1)
    x_hat = hd @ Wd2.T + bd2

    recon = 0.5 * np.sum((x_hat - x) ** 2, axis=1)
    kl = 0.5 * np.sum(np.exp(logvar) + mu * mu - 1.0 - logvar, axis=1)
    loss = float(np.mean(recon + beta * kl))

    # backward
    dx_hat = (x_hat - x) / B
    grads = {}
    grads["Wd2"] = dx_hat.T @ hd
    grads["bd2"] = dx_hat.sum(axis=0)
    dhd = dx_hat @ Wd2
    dzpre = dhd * (1 - hd * hd)
    grads["Wd1"] = dzpre.T @ z
    grads["bd1"] = dzpre.sum(axis=0)
    dz = dzpre @ Wd1

    dmu = dz + beta * mu / B
    dlogvar = dz * eps * 0.5 * std + beta * 0.5 * (np.exp(logvar) - 1.0) / B

    grads["Wm"] = dmu.T @ he
    grads["bm"] = dmu.sum(axis=0)
    grads["Wv"] = dlogvar.T @ he
    grads["bv"] = dlogvar.sum(axis=0)
    dhe = dmu @ Wm + dlogvar @ Wv
    dhe_pre = dhe * (1 - he * he)
    grads["We1"] = dhe_pre.T @ x
    grads["be1"] = dhe_pre.sum(axis=0)
    return loss, grads


def train_vae(inputs, hp: VaeHyperparams | None = None, seed: int | None = None) -> VaeModel:
    """Train on context representations from correct submissions.

    Minimizes the negative ELBO (reconstruction + beta * KL) by mini-batch
    gradient descent; deterministic for fixed (inputs, hp, seed). The
    per-epoch mean loss is recorded in loss_trace.
    """
    x_all = np.asarray(inputs, dtype=np.float64)
    if x_all.ndim != 2 or x_all.shape[0] == 0:
        raise ValueError("inputs must be a non-empty (N, d_in) array")
    if not np.isfinite(x_all).all():
        raise ValueError("inputs contain non-finite values")
    hp = hp or VaeHyperparams(d_in=x_all.shape[1])
    if hp.d_in != x_all.shape[1]:
        raise ValueError(f"input dimension {x_all.shape[1]} != configured {hp.d_in}")
    if seed is None:
        seed = hp.seed
    rng = np.random.default_rng(np.random.PCG64(seed))
    params = init_params(hp, rng)
    n = x_all.shape[0]
    trace = []
    for _epoch in range(hp.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for lo in range(0, n, hp.batch_size):
            idx = order[lo : lo + hp.batch_size]
            x = x_all[idx]
            eps = rng.standard_normal((x.shape[0], hp.d_z))
            loss, grads = loss_and_grads(params, x, eps, hp.beta)
            epoch_loss += loss * x.shape[0]
            for name in params:
                params[name] -= hp.learning_rate * grads[name]
        trace.append(epoch_loss / n)
    return VaeModel(params=params, hyperparams=hp, loss_trace=trace)


def encode_latent(model: VaeModel, x) -> np.ndarray:
    """Posterior mean mu(x); no sampling at inference time."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.hyperparams.d_in,):
        raise ValueError(f"expected input of dimension {model.hyperparams.d_in}, got {x.shape}")
    he = np.tanh(model.params["We1"] @ x + model.params["be1"])
    return model.params["Wm"] @ he + model.params["bm"]


def reconstruct(model: VaeModel, z: np.ndarray) -> np.ndarray:
    hd = np.tanh(model.params["Wd1"] @ z + model.params["bd1"])
    return model.params["Wd2"] @ hd + model.params["bd2"]
