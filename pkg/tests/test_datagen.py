import numpy as np
import pytest

from goclust.datagen import (
    GenConfig,
    cluster_sizes,
    draw_centroids,
    generate_dataset,
    toy_transform,
    toy_transform_rows,
    uncertainty_scales,
)
from goclust.errors import SingularInput


def test_toy_transform_hand_value():
    assert np.allclose(toy_transform([1, 0, 0, 0, 1, 0]), [0.5, 1.0, 1.0])
    # E = 0.5 * 4 + ln 2, L = |(2,0,0) x (0,0,2)| = 4, L_z = 0
    assert np.allclose(toy_transform([2, 0, 0, 0, 0, 2]), [2 + np.log(2), 4.0, 0.0])


def test_toy_transform_singular():
    with pytest.raises(SingularInput):
        toy_transform([0, 0, 0, 1, 0, 0])


def test_toy_transform_rotation_invariant_E_and_L():
    rng = np.random.default_rng(0)
    z = rng.normal(size=6)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    zr = np.concatenate([Q @ z[:3], Q @ z[3:]])
    assert np.allclose(toy_transform(z)[:2], toy_transform(zr)[:2])


def test_cluster_sizes_rule():
    assert cluster_sizes(12) == [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 1, 2]
    assert sum(cluster_sizes(50)) == 275


def test_default_dataset_shape():
    d, truth = generate_dataset(GenConfig(seed=1), return_truth=True)
    assert d.n == 275 and d.feature_dim == 3 and d.K_star == 50
    assert all(s.m == 101 for s in d.sets)
    assert np.bincount(d.true_labels)[1:].tolist() == cluster_sizes(50)
    assert [s.individual_id for s in d.sets] == list(range(1, 276))
    assert truth["features_true"].shape == (275, 3)


def test_same_seed_same_dataset():
    a = generate_dataset(GenConfig(K_star=5, m=10, seed=3))
    b = generate_dataset(GenConfig(K_star=5, m=10, seed=3))
    c = generate_dataset(GenConfig(K_star=5, m=10, seed=4))
    assert all(np.array_equal(x.candidates, y.candidates) for x, y in zip(a.sets, b.sets))
    assert not np.array_equal(a.sets[0].candidates, c.sets[0].candidates)


def test_individuals_do_not_depend_on_m_of_others():
    # per-individual streams: the first individuals are unchanged when K* grows
    a = generate_dataset(GenConfig(K_star=3, m=10, seed=3, sizes=[2, 2, 2]))
    b = generate_dataset(GenConfig(K_star=3, m=10, seed=3, sizes=[2, 2, 5]))
    assert all(np.array_equal(x.candidates, y.candidates) for x, y in zip(a.sets[:4], b.sets[:4]))


def test_uncertainty_scales_and_penalty():
    cfg = GenConfig()
    sig = uncertainty_scales(np.array([2.0, 0, 0, 0, 0, 0]), cfg)
    assert sig[0] == pytest.approx(cfg.sigma_major * 2 + cfg.sigma_major * 0.1)
    assert np.all(sig[1:] == cfg.sigma_minor)
    d = generate_dataset(GenConfig(K_star=4, m=50, seed=2))
    for s in d.sets:
        # uniform on +-2 sigma: penalty (dz / sigma)^2 / 2 never exceeds 2
        assert s.penalties.min() >= 0 and s.penalties.max() <= 2.0 + 1e-12


def test_centroids_feature_separation():
    cfg = GenConfig(K_star=30, seed=8)
    z = draw_centroids(cfg)
    f = toy_transform_rows(z)
    D = np.linalg.norm(f[:, None] - f[None], axis=2) + np.eye(len(f)) * 1e9
    assert D.min() > cfg.separation * cfg.cluster_spread
    r = np.linalg.norm(z[:, :3], axis=1)
    assert r.min() >= cfg.r_min and r.max() <= cfg.r_max


@pytest.mark.parametrize(
    "kwargs", [dict(K_star=0), dict(sigma_major=0), dict(sizes=[1, 2]), dict(r_min=3, r_max=1)]
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        GenConfig(**kwargs)


def test_toy_transform_at_rest():
    assert np.allclose(toy_transform([1, 0, 0, 0, 0, 0]), [0.0, 0.0, 0.0])


def _silhouette(X, labels):
    D = np.linalg.norm(X[:, None] - X[None], axis=2)
    out = np.zeros(len(X))
    for i in range(len(X)):
        own = labels == labels[i]
        if own.sum() == 1:
            continue  # singleton: 0 by convention
        a = D[i, own].sum() / (own.sum() - 1)
        b = min(D[i, labels == k].mean() for k in np.unique(labels) if k != labels[i])
        out[i] = (b - a) / max(a, b)
    return out.mean()


def test_true_features_well_separated():
    good = 0
    for seed in range(1, 11):
        d, truth = generate_dataset(GenConfig(seed=seed, m=1), return_truth=True)
        good += _silhouette(truth["features_true"], d.true_labels) > 0.5
    assert good >= 9


def test_default_dataset_cluster_size_counts():
    d = generate_dataset(GenConfig(seed=1, m=1))
    sizes = np.bincount(d.true_labels)[1:]
    assert all(np.sum(sizes == s) == 5 for s in range(1, 11))
