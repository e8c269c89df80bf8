"""Tests for random potential generation and Gaussian moment evaluation."""

import numpy as np
import pytest

from kinlab.grids import Grid
from kinlab.potential import (
    CorrelationProfile,
    CutoffBump,
    all_pairings,
    empirical_covariance,
    localized_fourier,
    pair_moment,
    partition_moment,
    sample_potential,
    window_phase_vector,
)

GRID = Grid(n=256, dim=1, spacing=0.5)
CORR = CorrelationProfile.from_bump(GRID, amplitude=1.0, support_radius=4.0)
BUMP = CutoffBump(r=8.0)


def batch_gaussian(corr, grid, n_samples, seed):
    """Vectorized sampler used as the MC oracle (same spectral synthesis)."""
    rng = np.random.default_rng(seed)
    shape = (n_samples,) + grid.shape
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    amp = np.sqrt(grid.length**grid.dim * corr.fourier_R)
    axes = tuple(range(1, grid.dim + 1))
    return np.real(np.fft.ifftn(amp * z, axes=axes)) / grid.cell_volume


def test_zero_covariance_gives_zero_field():
    corr0 = CorrelationProfile.zero(GRID, support_radius=2.0)
    f = sample_potential("gaussian", corr0, GRID, seed=7)
    assert np.all(f.values == 0.0)


def test_gaussian_variance_matches_R0():
    n = 10_000
    vals = batch_gaussian(CORR, GRID, n, seed=11)[:, 0]
    var = vals.var()
    stderr = CORR.values[0] * np.sqrt(2.0 / n)
    assert abs(var - CORR.values[0]) < 3.0 * stderr


def test_lattice_mean_zero():
    grid = Grid(n=128, dim=1, spacing=0.5)
    n = 2000
    means = np.array(
        [sample_potential("lattice", None, grid, seed=s, bump_radius=0.5).values.mean() for s in range(n)]
    )
    stderr = means.std() / np.sqrt(n)
    assert abs(means.mean()) < 3.0 * max(stderr, 1e-12)


def test_poisson_mean_zero():
    grid = Grid(n=128, dim=1, spacing=0.5)
    n = 500
    means = np.array(
        [sample_potential("poisson", None, grid, seed=s, bump_radius=1.0).values.mean() for s in range(n)]
    )
    stderr = means.std() / np.sqrt(n)
    assert abs(means.mean()) < 3.0 * max(stderr, 1e-12)


def test_determinism_bit_exact():
    a = sample_potential("gaussian", CORR, GRID, seed=42)
    b = sample_potential("gaussian", CORR, GRID, seed=42)
    assert np.array_equal(a.values, b.values)
    c = sample_potential("lattice", None, GRID, seed=5, bump_radius=0.5)
    d = sample_potential("lattice", None, GRID, seed=5, bump_radius=0.5)
    assert np.array_equal(c.values, d.values)


def test_grid_too_small_rejected():
    small = Grid(n=16, dim=1, spacing=0.5)
    with pytest.raises(ValueError):
        CorrelationProfile.from_bump(small, support_radius=4.0)


def test_nonpositive_definite_profile_rejected():
    # a plain (non-autocorrelation) wide bump has an oscillating transform
    from kinlab.potential import _radial_profile_on_grid, smooth_bump

    vals = _radial_profile_on_grid(GRID, smooth_bump, 6.0)
    with pytest.raises(ValueError, match="rejected"):
        CorrelationProfile(grid=GRID, values=vals, support_radius=6.0)


def test_empirical_covariance_decouples_at_range():
    fields = [sample_potential("gaussian", CORR, GRID, seed=s) for s in range(600)]
    # distance beyond the correlation support
    c_far = empirical_covariance(fields, 10.0, 40.0)
    samples = np.array([f.values[GRID.nearest_index(10.0)] * f.values[GRID.nearest_index(40.0)] for f in fields])
    stderr = samples.std() / np.sqrt(len(fields))
    assert abs(c_far) < 3.0 * stderr
    # at coincident points the covariance is R(0)
    c0 = empirical_covariance(fields, 10.0, 10.0)
    stderr0 = CORR.values[0] * np.sqrt(2.0 / len(fields))
    assert abs(c0 - CORR.values[0]) < 3.0 * stderr0


def test_empirical_covariance_single_field():
    f = sample_potential("gaussian", CORR, GRID, seed=0)
    v = empirical_covariance([f], 1.0, 2.0)
    assert v == f.values[GRID.nearest_index(1.0)] * f.values[GRID.nearest_index(2.0)]


def test_empirical_covariance_grid_mismatch():
    f = sample_potential("gaussian", CORR, GRID, seed=0)
    other = Grid(n=128, dim=1, spacing=0.5)
    g = sample_potential("lattice", None, other, seed=0, bump_radius=0.5)
    with pytest.raises(ValueError):
        empirical_covariance([f, g], 0.0, 1.0)


def test_localized_fourier_zero_field():
    corr0 = CorrelationProfile.zero(GRID, support_radius=2.0)
    f = sample_potential("gaussian", corr0, GRID, seed=1)
    out = localized_fourier(f, y=3.0, q=1.0, bump=BUMP)
    assert out.value == 0.0


def test_localized_fourier_cosine_peak():
    # V(x) = cos(q0 x): |V̂_y(q)| is maximized at q = ±q0 on the lattice
    k0 = 30
    q0 = GRID.p1d[k0]
    vals = np.cos(q0 * GRID.x1d)
    from kinlab.potential import PotentialField

    f = PotentialField(values=vals, grid=GRID, kind="gaussian", seed=0)
    for y in (5.0, 60.0):
        mags = np.array([abs(localized_fourier(f, y, q, BUMP).value) for q in GRID.p1d])
        top = set(np.argsort(mags)[-2:])
        assert top == {k0, GRID.n - k0}


def test_localized_fourier_conjugate_symmetry():
    f = sample_potential("gaussian", CORR, GRID, seed=3)
    q = GRID.p1d[7]
    a = localized_fourier(f, 12.0, q, BUMP).value
    b = localized_fourier(f, 12.0, -q, BUMP).value
    assert a == pytest.approx(np.conj(b), rel=1e-12)


def test_localized_fourier_off_lattice_flag():
    f = sample_potential("gaussian", CORR, GRID, seed=3)
    out = localized_fourier(f, 12.0, 0.33, BUMP)
    assert out.off_lattice
    on = localized_fourier(f, 12.0, GRID.p1d[4], BUMP)
    assert not on.off_lattice


def test_window_decoupling_mc():
    # windows far apart: E V̂_y(q) V̂_{y'}(q') -> 0
    y, yp = 5.0, 5.0 + 2 * (10 * 2.0) + 6.0
    bump = CutoffBump(r=2.0)
    grid = Grid(n=512, dim=1, spacing=0.25)
    corr = CorrelationProfile.from_bump(grid, amplitude=1.0, support_radius=4.0)
    q = grid.p1d[6]
    w1 = window_phase_vector(grid, [y], [q], bump)
    w2 = window_phase_vector(grid, [yp], [-q], bump)
    vs = batch_gaussian(corr, grid, 4000, seed=21)
    prods = (vs @ w1) * (vs @ w2)
    stderr = prods.std() / np.sqrt(len(prods))
    assert abs(prods.mean()) < 3.0 * stderr
    # and the exact pair moment is literally zero there
    assert pair_moment(corr, bump, [y], [yp], [q], [-q]) == 0.0


def test_pair_moment_hermitian_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(5):
        y, yp = rng.uniform(0, GRID.length, size=2)
        q, qp = rng.choice(GRID.p1d, size=2)
        a = pair_moment(CORR, BUMP, [y], [yp], [q], [qp])
        b = pair_moment(CORR, BUMP, [yp], [y], [-qp], [-q])
        assert a == pytest.approx(np.conj(b), abs=1e-12)


def test_pair_moment_variance_nonnegative():
    q = GRID.p1d[9]
    v = pair_moment(CORR, BUMP, [20.0], [20.0], [q], [-q])
    assert abs(v.imag) < 1e-12
    assert v.real >= 0.0


def test_pair_moment_vs_mc():
    rng = np.random.default_rng(123)
    n = 100_000
    vs = batch_gaussian(CORR, GRID, n, seed=77)
    for _ in range(4):
        y, yp = rng.uniform(20, 40, size=2)
        q, qp = rng.choice(GRID.p1d[:40], size=2)
        exact = pair_moment(CORR, BUMP, [y], [yp], [q], [qp])
        w1 = window_phase_vector(GRID, [y], [q], BUMP)
        w2 = window_phase_vector(GRID, [yp], [qp], BUMP)
        prods = (vs @ w1) * (vs @ w2)
        err = np.sqrt(prods.var(ddof=1) / n)
        assert abs(prods.mean() - exact) < 3.0 * max(err, 1e-12)


def test_partition_moment_singleton_vanishes():
    X = [([10.0], [GRID.p1d[3]]), ([11.0], [GRID.p1d[5]]), ([12.0], [-GRID.p1d[3]])]
    P = [{0}, {1, 2}]
    assert partition_moment(P, X, CORR, BUMP) == 0.0


def test_partition_moment_pair_is_pair_moment():
    X = [([10.0], [GRID.p1d[3]]), ([11.0], [-GRID.p1d[3]])]
    v = partition_moment([{0, 1}], X, CORR, BUMP)
    w = pair_moment(CORR, BUMP, [10.0], [11.0], [GRID.p1d[3]], [-GRID.p1d[3]])
    assert v == pytest.approx(w, rel=1e-12)


def test_partition_moment_bad_partition():
    X = [([10.0], [1.0]), ([11.0], [-1.0])]
    with pytest.raises(ValueError):
        partition_moment([{0}], X, CORR, BUMP)
    with pytest.raises(ValueError):
        partition_moment([{0, 1}, {1}], X, CORR, BUMP)


def test_fourth_moment_wick_sum_vs_mc():
    # one 4-cell: sum of the 3 pairing products, against MC
    rng = np.random.default_rng(5)
    ys = rng.uniform(25, 32, size=4)
    qs = rng.choice(GRID.p1d[:30], size=4)
    X = [([ys[i]], [qs[i]]) for i in range(4)]
    exact = partition_moment([{0, 1, 2, 3}], X, CORR, BUMP)
    assert len(list(all_pairings([0, 1, 2, 3]))) == 3

    n = 100_000
    vs = batch_gaussian(CORR, GRID, n, seed=99)
    ws = [window_phase_vector(GRID, [ys[i]], [qs[i]], BUMP) for i in range(4)]
    prods = (vs @ ws[0]) * (vs @ ws[1]) * (vs @ ws[2]) * (vs @ ws[3])
    mc = prods.mean()
    assert abs(mc - exact) < 0.05 * abs(exact) + 3.0 * np.sqrt(prods.var(ddof=1) / n)


def test_wick_consistency_two_point():
    # full MC moment of a 2-set equals the sum over pair partitions (here one)
    y, yp = 30.0, 31.5
    q, qp = GRID.p1d[4], GRID.p1d[12]
    X = [([y], [q]), ([yp], [qp])]
    total = partition_moment([{0, 1}], X, CORR, BUMP)
    n = 40_000
    vs = batch_gaussian(CORR, GRID, n, seed=13)
    w1 = window_phase_vector(GRID, [y], [q], BUMP)
    w2 = window_phase_vector(GRID, [yp], [qp], BUMP)
    prods = (vs @ w1) * (vs @ w2)
    err = np.sqrt(prods.var(ddof=1) / n)
    assert abs(prods.mean() - total) < 3.0 * max(err, 1e-12)


def test_cutoff_bump_normalization():
    assert BUMP.integral(GRID) == pytest.approx(1.0, abs=1e-10)
    assert np.all(BUMP.window(GRID, 12.0) >= 0.0)
