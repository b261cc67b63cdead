import numpy as np
import pytest

import kernpot as kp
from kernpot.errors import AlphaAtBoundary, EmptyDataset, SingularGram
from kernpot.kernels import EXTENSIVE, KernelSpec
from kernpot.krr import solve_regularized
from synthdata import feature_dataset


def spec_for(ds, base, alpha=0.0, mode=EXTENSIVE):
    return KernelSpec(base, mode, alpha=alpha, n_species=ds.species_table.n_species)


# -- solver ---------------------------------------------------------------------


def test_scalar_solve_unregularized():
    c, lam = solve_regularized(np.array([[2.0]]), np.array([4.0]), 0.0, allow_unregularized=True)
    assert c[0] == pytest.approx(2.0, rel=1e-15)
    assert lam == 0.0


def test_identity_gram_solve():
    c, _ = solve_regularized(np.eye(2), np.array([2.0, 4.0]), 1.0)
    np.testing.assert_allclose(c, [1.0, 2.0], rtol=1e-15)


def test_lambda_zero_needs_flag():
    with pytest.raises(ValueError):
        solve_regularized(np.eye(2), np.ones(2), 0.0)


def test_jitter_escalation_succeeds():
    g = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues -1, 3
    with pytest.warns(RuntimeWarning):
        c, lam_used = solve_regularized(g, np.ones(2), 0.5)
    assert lam_used == pytest.approx(5.0)
    np.testing.assert_allclose((g + lam_used * np.eye(2)) @ c, np.ones(2), rtol=1e-12)


def test_jitter_exhaustion_raises():
    g = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(SingularGram), pytest.warns(RuntimeWarning):
        solve_regularized(g, np.ones(2), 1e-18)


def test_zero_lambda_never_escalates():
    g = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(SingularGram):
        solve_regularized(g, np.ones(2), 0.0, allow_unregularized=True)


# -- fit / predict -----------------------------------------------------------------


def test_fit_empty_dataset(rng):
    ds = feature_dataset(rng, 1)
    empty = kp.LabeledDataset((), ds.species_table)
    with pytest.raises(EmptyDataset):
        kp.fit(empty, spec_for(ds, kp.linear_kernel()), 1e-6)


def test_interpolation_small_lambda(rng):
    ds = feature_dataset(rng, 10, n_atoms=4, dim=3)
    spec = spec_for(ds, kp.gaussian_kernel(1.5))
    model = kp.fit(ds, spec, 1e-12)
    preds = kp.predict(model, ds)
    np.testing.assert_allclose(preds, ds.energies(), rtol=1e-6)


def test_single_training_point(rng):
    ds = feature_dataset(rng, 1, n_atoms=3)
    spec = spec_for(ds, kp.gaussian_kernel(1.0))
    model = kp.fit(ds, spec, 1e-10)
    fs = ds.entries[0].features
    expected = model.coefficients[0] * kp.composite_kernel(spec, fs, fs)
    assert kp.predict(model, [fs])[0] == pytest.approx(expected, rel=1e-12)


def test_duplicated_query_extensive_doubles(rng):
    ds = feature_dataset(rng, 6, n_atoms=4)
    spec = spec_for(ds, kp.gaussian_kernel(1.2), alpha=0.5)
    model = kp.fit(ds, spec, 1e-8)
    fs = ds.entries[0].features
    doubled = kp.FeatureSet(
        np.vstack([fs.features, fs.features]), np.concatenate([fs.species, fs.species])
    )
    single, double = kp.predict(model, [fs, doubled])
    assert double == pytest.approx(2.0 * single, rel=1e-12)


def test_kfold_extensivity_exact(rng):
    ds = feature_dataset(rng, 5, n_atoms=3)
    spec = spec_for(ds, kp.gaussian_kernel(0.9))
    model = kp.fit(ds, spec, 1e-9)
    fs = ds.entries[2].features
    base = kp.predict(model, [fs])[0]
    for k in (2, 3):
        rep = kp.FeatureSet(
            np.vstack([fs.features] * k), np.concatenate([fs.species] * k)
        )
        assert kp.predict(model, [rep])[0] == pytest.approx(k * base, rel=1e-12)


def test_prediction_within_species_permutation_invariant(rng):
    ds = feature_dataset(rng, 6, n_atoms=5)
    spec = spec_for(ds, kp.gaussian_kernel(1.0), alpha=0.7)
    model = kp.fit(ds, spec, 1e-8)
    fs = ds.entries[0].features
    base = kp.predict(model, [fs])[0]
    for _ in range(20):
        perm = np.random.default_rng(0).permutation(fs.n_atoms)
        permuted = kp.FeatureSet(fs.features[perm], fs.species[perm])
        assert kp.predict(model, [permuted])[0] == pytest.approx(base, rel=1e-12)


def test_monotone_train_mse_in_lambda(rng):
    ds = feature_dataset(rng, 12, n_atoms=4)
    spec = spec_for(ds, kp.gaussian_kernel(1.0))
    mses = []
    for lam in (1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0):
        model = kp.fit(ds, spec, lam)
        mses.append(float(np.mean((kp.predict(model, ds) - ds.energies()) ** 2)))
    assert all(b >= a - 1e-12 for a, b in zip(mses, mses[1:]))


def test_representer_consistency_linear(rng):
    ds = feature_dataset(rng, 8, n_atoms=4, dim=5)
    spec = spec_for(ds, kp.linear_kernel())
    lam = 1e-3
    model = kp.fit(ds, spec, lam)
    preds = kp.predict(model, ds)

    pooled = np.array([fs.features.sum(axis=0) for fs in ds.feature_sets()])
    w_hat = np.linalg.solve(pooled.T @ pooled + lam * np.eye(5), pooled.T @ ds.energies())
    np.testing.assert_allclose(preds, pooled @ w_hat, rtol=1e-10, atol=1e-10)


# -- explicit multi-weight oracle -----------------------------------------------------


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_multiweight_equivalence(rng, alpha):
    ds = feature_dataset(rng, 8, n_atoms=5, n_species=2, dim=4)
    spec = spec_for(ds, kp.linear_kernel(), alpha=alpha)
    kernel_side = kp.predict(kp.fit(ds, spec, 1e-3), ds)
    weight_side = kp.predict_multiweight(kp.fit_multiweight_explicit(ds, alpha, 1e-3), ds)
    np.testing.assert_allclose(weight_side, kernel_side, rtol=1e-8)


def test_multiweight_w0_vanishes_near_alpha_one(rng):
    ds = feature_dataset(rng, 8, n_atoms=5, dim=4)
    norms = []
    for alpha in (0.9, 0.99, 0.999, 0.9999):
        mw = kp.fit_multiweight_explicit(ds, alpha, 1e-3)
        norms.append(np.linalg.norm(mw.w0))
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1e-2 * norms[0]


def test_multiweight_single_species_matches_plain_krr(rng):
    ds = feature_dataset(rng, 7, n_atoms=4, n_species=1, dim=3)
    plain = kp.predict(kp.fit(ds, spec_for(ds, kp.linear_kernel(), alpha=0.0), 1e-4), ds)
    mw = kp.fit_multiweight_explicit(ds, 0.5, 1e-4)
    np.testing.assert_allclose(kp.predict_multiweight(mw, ds), plain, rtol=1e-8)


def test_multiweight_boundary_alphas_drop_block(rng):
    ds = feature_dataset(rng, 6, n_atoms=4, dim=3)
    for alpha in (0.0, 1.0):
        mw = kp.fit_multiweight_explicit(ds, alpha, 1e-4)
        kernel_side = kp.predict(kp.fit(ds, spec_for(ds, kp.linear_kernel(), alpha=alpha), 1e-4), ds)
        np.testing.assert_allclose(kp.predict_multiweight(mw, ds), kernel_side, rtol=1e-8)
    assert np.all(kp.fit_multiweight_explicit(ds, 1.0, 1e-4).w0 == 0.0)


def test_multiweight_alpha_out_of_range(rng):
    ds = feature_dataset(rng, 3)
    with pytest.raises(AlphaAtBoundary):
        kp.fit_multiweight_explicit(ds, 1.5, 1e-4)
