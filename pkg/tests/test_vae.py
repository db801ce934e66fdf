import numpy as np
import pytest

from kcgen.vae import (
    VaeHyperparams,
    VaeModel,
    encode_latent,
    init_params,
    kl_to_standard_normal,
    loss_and_grads,
    train_vae,
)


def blob_inputs(n=100, d=8, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, 2.0, (4, d))
    return centers[rng.integers(0, 4, n)] + rng.normal(0, 0.1, (n, d))


class TestLoss:
    def test_kl_of_standard_normal_is_zero(self):
        mu = np.zeros(5)
        logvar = np.zeros(5)
        assert kl_to_standard_normal(mu, logvar) == 0.0

    def test_kl_positive_otherwise(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            mu = rng.normal(0, 1, 6)
            logvar = rng.normal(0, 1, 6)
            if np.allclose(mu, 0) and np.allclose(logvar, 0):
                continue
            assert kl_to_standard_normal(mu, logvar) > 0

    def test_duplication_invariance(self):
        # per-sample mean loss is unchanged when the batch is duplicated
        hp = VaeHyperparams(d_in=6, d_hidden=5, d_z=3)
        rng = np.random.default_rng(3)
        params = init_params(hp, rng)
        x = rng.normal(0, 1, (4, 6))
        eps = rng.standard_normal((4, 3))
        l1, _ = loss_and_grads(params, x, eps, beta=1.0)
        l2, _ = loss_and_grads(
            params, np.vstack([x, x]), np.vstack([eps, eps]), beta=1.0
        )
        assert l1 == pytest.approx(l2, rel=1e-12)


class TestTraining:
    def test_beta_zero_reconstruction_decreases(self):
        x = blob_inputs(n=100, d=8)
        hp = VaeHyperparams(d_in=8, d_hidden=16, d_z=4, beta=0.0, epochs=10)
        model = train_vae(x, hp, seed=0)
        trace = model.loss_trace
        assert all(b < a for a, b in zip(trace, trace[1:]))

    def test_rejects_non_finite(self):
        x = blob_inputs(n=10, d=4)
        x[3, 1] = np.nan
        with pytest.raises(ValueError):
            train_vae(x, VaeHyperparams(d_in=4, epochs=1))

    def test_determinism(self, tmp_path):
        x = blob_inputs(n=40, d=6)
        hp = VaeHyperparams(d_in=6, d_hidden=8, d_z=3, epochs=5)
        m1 = train_vae(x, hp, seed=7)
        m2 = train_vae(x, hp, seed=7)
        p1, p2 = tmp_path / "a.vae", tmp_path / "b.vae"
        m1.save(p1)
        m2.save(p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestEncode:
    def test_inference_deterministic(self):
        x = blob_inputs(n=40, d=6)
        model = train_vae(x, VaeHyperparams(d_in=6, d_hidden=8, d_z=3, epochs=5), seed=1)
        a = encode_latent(model, x[0])
        b = encode_latent(model, x[0])
        assert np.array_equal(a, b)

    def test_dimension_mismatch(self):
        x = blob_inputs(n=20, d=6)
        model = train_vae(x, VaeHyperparams(d_in=6, d_hidden=8, d_z=3, epochs=2), seed=1)
        with pytest.raises(ValueError):
            encode_latent(model, np.zeros(7))

    def test_straight_line_recomputation(self):
        hp = VaeHyperparams(d_in=5, d_hidden=4, d_z=2)
        rng = np.random.default_rng(9)
        model = VaeModel(params=init_params(hp, rng), hyperparams=hp)
        x = rng.normal(0, 1, 5)
        he = np.tanh(model.params["We1"] @ x + model.params["be1"])
        expected = model.params["Wm"] @ he + model.params["bm"]
        assert np.allclose(encode_latent(model, x), expected)

    def test_cluster_structure_in_latent(self):
        # structurally similar inputs embed nearer than dissimilar ones
        rng = np.random.default_rng(5)
        d = 8
        centers = rng.normal(0, 3.0, (3, d))
        labels = rng.integers(0, 3, 150)
        x = centers[labels] + rng.normal(0, 0.1, (150, d))
        hp = VaeHyperparams(d_in=d, d_hidden=32, d_z=4, beta=0.1, epochs=100)
        model = train_vae(x, hp, seed=2)
        zs = np.stack([encode_latent(model, xi) for xi in x])
        intra, inter = [], []
        for i in range(0, 150, 3):
            for j in range(i + 1, 150, 7):
                dist = np.linalg.norm(zs[i] - zs[j])
                (intra if labels[i] == labels[j] else inter).append(dist)
        assert np.mean(intra) < np.mean(inter)


class TestGradients:
    def test_finite_difference_check(self):
        rng = np.random.default_rng(123)
        hp = VaeHyperparams(d_in=5, d_hidden=4, d_z=3)
        for trial in range(20):
            params = init_params(hp, rng)
            x = rng.normal(0, 1, (3, 5))
            eps = rng.standard_normal((3, 3))
            beta = float(rng.uniform(0.0, 2.0))
            _, grads = loss_and_grads(params, x, eps, beta)
            for name, tensor in params.items():
                flat = tensor.reshape(-1)
                gflat = grads[name].reshape(-1)
                probes = rng.choice(flat.size, size=min(4, flat.size), replace=False)
                for j in probes:
                    h = 1e-5
                    orig = flat[j]
                    flat[j] = orig + h
                    lp, _ = loss_and_grads(params, x, eps, beta)
                    flat[j] = orig - h
                    lm, _ = loss_and_grads(params, x, eps, beta)
                    flat[j] = orig
                    fd = (lp - lm) / (2 * h)
                    denom = max(abs(fd), abs(gflat[j]), 1e-6)
                    assert abs(fd - gflat[j]) / denom < 1e-4, (name, j, fd, gflat[j])
