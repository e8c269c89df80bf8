"""Tests for the wavepacket frame, Wigner transform, and quantizations."""

import numpy as np
import pytest

from kinlab.grids import Grid
from kinlab.wavepacket import (
    Envelope,
    Observable,
    PhasePoint,
    ck_norm,
    frame_overlap_constant,
    half_grid_coords,
    make_wavepacket,
    operator_norm,
    phase_distance,
    phase_pairing,
    refine_wavefunction,
    schur_opnorm_bound,
    wavepacket_quantize,
    weyl_quantize,
    wigner_transform,
)

GRID = Grid(n=256, dim=1, spacing=1.0)
ENV = Envelope(r=8.0)


def centered_gaussian(grid, sigma=1.0, p0=0.0):
    x0 = grid.length / 2
    psi = np.exp(-((grid.x1d - x0) ** 2) / (4 * sigma**2) + 1j * p0 * grid.x1d)
    return psi / grid.norm(psi)


# ---------------------------------------------------------------------------
# wavepackets and the phase-space metric
# ---------------------------------------------------------------------------


def test_wavepacket_normalized():
    phi = make_wavepacket(PhasePoint([100.0], [0.7]), ENV, GRID)
    assert abs(GRID.norm(phi) - 1.0) < 1e-6


def test_envelope_normalization_and_support():
    assert Envelope(r=4.0).l2_norm_unit_scale(dim=1) > 0
    assert ENV(np.array([1.5]))[0] == 0.0


def test_wavepacket_translation_covariance():
    xi = PhasePoint([100.0], [0.5])
    phi = make_wavepacket(xi, ENV, GRID)
    v = 8.0
    phi2 = make_wavepacket(PhasePoint([100.0 + v], [0.5]), ENV, GRID)
    assert np.allclose(phi2, np.roll(phi, int(v / GRID.spacing)) * np.exp(1j * v * 0.5), atol=1e-12)


def test_wavepacket_localized():
    xi = PhasePoint([100.0], [0.0])
    phi = make_wavepacket(xi, ENV, GRID)
    mask = np.abs(GRID.min_image(GRID.x1d - 100.0)) > ENV.r
    assert np.all(np.abs(phi[mask]) == 0.0)


def test_wavepacket_scale_too_small():
    with pytest.raises(ValueError):
        make_wavepacket(PhasePoint([10.0], [0.0]), Envelope(r=2.0), GRID)


def test_phase_distance_metric():
    a = PhasePoint([10.0], [0.2])
    assert phase_distance(a, a, 8.0, GRID) == 0.0
    b = PhasePoint([13.0], [0.2])
    assert phase_distance(a, b, 8.0, GRID) == pytest.approx(3.0 / 8.0)
    # doubling r halves the position term and doubles the momentum term
    c = PhasePoint([13.0], [0.4])
    d1 = phase_distance(a, c, 8.0, GRID)
    d2 = phase_distance(a, c, 16.0, GRID)
    assert d2 == pytest.approx(3.0 / 16.0 + 16.0 * 0.2)
    assert d1 == pytest.approx(3.0 / 8.0 + 8.0 * 0.2)
    # symmetry and triangle inequality on random triples
    rng = np.random.default_rng(3)
    for _ in range(20):
        pts = [PhasePoint([rng.uniform(0, GRID.length)], [rng.uniform(-1, 1)]) for _ in range(3)]
        dab = phase_distance(pts[0], pts[1], 8.0, GRID)
        assert dab == pytest.approx(phase_distance(pts[1], pts[0], 8.0, GRID))
        assert dab <= phase_distance(pts[0], pts[2], 8.0, GRID) + phase_distance(pts[2], pts[1], 8.0, GRID) + 1e-12


def test_overlap_decay_fit():
    rng = np.random.default_rng(11)
    logs, dpow = [], []
    center = GRID.length / 2
    for _ in range(100):
        d = rng.uniform(1.0, 10.0)
        frac = rng.uniform(0.0, 1.0)
        dx = frac * d * ENV.r
        dp = (1 - frac) * d / ENV.r
        a = PhasePoint([center - dx / 2], [0.0])
        b = PhasePoint([center + dx / 2], [dp])
        ov = abs(GRID.inner(make_wavepacket(a, ENV, GRID), make_wavepacket(b, ENV, GRID)))
        if ov > 1e-30:
            logs.append(np.log(ov))
            dpow.append(phase_distance(a, b, ENV.r, GRID) ** 0.9)
    A = np.vstack([dpow, np.ones(len(dpow))]).T
    slope, _ = np.linalg.lstsq(A, logs, rcond=None)[0]
    assert slope < 0.0
    assert len(logs) > 50


# ---------------------------------------------------------------------------
# Wigner transform
# ---------------------------------------------------------------------------


def test_wigner_gaussian_oracle():
    g = Grid(n=256, dim=1, spacing=0.125)
    x0 = g.length / 2
    psi = np.pi**-0.25 * np.exp(-((g.x1d - x0) ** 2) / 2)
    psi /= g.norm(psi)
    W = wigner_transform(psi, g)
    assert np.abs(W.imag).max() <= 1e-10 * np.abs(W).max()
    xs, ps = half_grid_coords(g), g.p1d
    oracle = 2 * np.exp(-((xs[:, None] - x0) ** 2) - ps[None, :] ** 2)
    window = np.abs(xs - x0) < g.length / 4
    assert np.abs(W.real[window] - oracle[window]).max() < 1e-10


def test_wigner_is_real():
    psi = centered_gaussian(GRID, sigma=3.0, p0=0.5)
    W = wigner_transform(psi, GRID)
    assert np.abs(W.imag).max() <= 1e-10 * np.abs(W).max()


def test_wigner_total_mass_and_marginal():
    psi = centered_gaussian(GRID, sigma=4.0, p0=0.3)
    W = wigner_transform(psi, GRID).real
    mass = (0.5 * GRID.spacing) * np.sum(W) / GRID.length
    assert abs(mass - GRID.norm(psi) ** 2) < 1e-8
    marginal = W.sum(axis=1) / GRID.length
    fine = refine_wavefunction(psi, GRID)
    assert np.abs(marginal - np.abs(fine) ** 2).max() < 1e-10


# ---------------------------------------------------------------------------
# Weyl quantization
# ---------------------------------------------------------------------------


def test_weyl_constant_symbol_is_identity():
    one = Observable(func=lambda x, p: 1.0, r=8.0)
    assert np.abs(weyl_quantize(one, GRID) - np.eye(GRID.n)).max() < 1e-8


def test_weyl_position_symbol_multiplies():
    # a(x,p) = sin(2 pi x / L): multiplication operator (periodic coordinate)
    w = 2 * np.pi / GRID.length
    a = Observable(func=lambda x, p: np.sin(w * np.asarray(x)) + 0.0 * np.asarray(p), r=8.0)
    A = weyl_quantize(a, GRID)
    rng = np.random.default_rng(0)
    for _ in range(10):
        psi = rng.standard_normal(GRID.n) + 1j * rng.standard_normal(GRID.n)
        assert np.allclose(A @ psi, np.sin(w * GRID.x1d) * psi, atol=1e-10)


def test_weyl_selfadjoint_for_real_symbol():
    a = Observable(func=lambda x, p: np.cos(2 * np.pi * np.asarray(x) / GRID.length) + np.cos(np.asarray(p)), r=8.0)
    A = weyl_quantize(a, GRID)
    assert np.abs(A - A.conj().T).max() < 1e-10


def test_weyl_wigner_pairing():
    rng = np.random.default_rng(7)
    x0 = GRID.length / 2
    for trial in range(3):
        cx = rng.uniform(4, 10)
        kp = rng.integers(1, 3)
        a = Observable(
            func=lambda x, p, cx=cx, kp=kp: np.exp(-(((np.asarray(x) - x0) / cx) ** 2)) * np.cos(kp * np.asarray(p)),
            r=8.0,
        )
        psi = centered_gaussian(GRID, sigma=rng.uniform(2, 5), p0=rng.uniform(-0.5, 0.5))
        A = weyl_quantize(a, GRID)
        lhs = complex(np.vdot(psi, A @ psi) * GRID.cell_volume)
        rhs = phase_pairing(a.values(GRID), wigner_transform(psi, GRID).real, GRID)
        assert abs(lhs - rhs) <= 1e-6 * abs(lhs)


# ---------------------------------------------------------------------------
# wavepacket quantization
# ---------------------------------------------------------------------------


def test_frame_operator_close_to_identity():
    g = Grid(n=512, dim=1, spacing=1.0)
    env = Envelope(r=16.0)
    one = Observable(func=lambda x, p: 1.0, r=16.0)
    F = wavepacket_quantize(one, env, g)
    assert operator_norm(F - np.eye(g.n)) <= 1e-2


def test_frame_deviation_decreases_under_refinement():
    from kinlab.potential import smooth_bump

    g = Grid(n=512, dim=1, spacing=1.0)
    env = Envelope(r=16.0, profile=smooth_bump)  # generic bump: no exact aliasing
    one = Observable(func=lambda x, p: 1.0, r=16.0)
    devs = [
        operator_norm(wavepacket_quantize(one, env, g, x_stride=s, strict=False) - np.eye(g.n))
        for s in (32, 16, 4)
    ]
    assert devs[0] > devs[1] > devs[2]


def test_narrow_bump_is_near_rank_one_projector():
    g = Grid(n=256, dim=1, spacing=1.0)
    env = Envelope(r=8.0)
    xi0 = PhasePoint([g.length / 2], [g.p1d[5]])
    # unit phase-space mass concentrated at one quadrature node
    wx = 2.0 * g.spacing  # stride 2
    wp = (2 * np.pi / g.length) / (2 * np.pi)
    mass = wx * wp

    def bump(x, p):
        hit = (np.abs(np.asarray(x) - xi0.x[0]) < 0.9 * wx / 2) & (np.abs(np.asarray(p) - xi0.p[0]) < 0.45 * 2 * np.pi / g.length)
        return hit / mass

    A = wavepacket_quantize(Observable(func=bump, r=8.0), env, g, x_stride=2)
    phi = make_wavepacket(xi0, env, g)
    proj = np.outer(phi, phi.conj()) * g.cell_volume
    assert operator_norm(A - proj) < 0.05 * operator_norm(proj)


def test_wavepacket_quantization_positive():
    g = Grid(n=256, dim=1, spacing=1.0)
    env = Envelope(r=8.0)

    def apos(x, p):
        return np.broadcast_to(np.exp(-((np.asarray(p) / 0.5) ** 2)), np.broadcast_shapes(np.shape(x), np.shape(p))).astype(float)

    A = wavepacket_quantize(Observable(func=apos, r=8.0), env, g)
    assert np.abs(A - A.conj().T).max() < 1e-10
    assert np.linalg.eigvalsh((A + A.conj().T) / 2).min() > -1e-8


def test_quantization_comparison_bound():
    g = Grid(n=512, dim=1, spacing=1.0)
    r, delta = 16.0, 1.0 / 8.0
    L = 1.0 / delta
    env = Envelope(r=r)
    x0 = g.length / 2
    symbols = [
        lambda x, p: np.exp(-((g.min_image(np.asarray(x) - x0) / (r * L)) ** 2)) * np.cos(p * r / L),
        lambda x, p: np.cos(2 * np.pi * np.asarray(x) / g.length) * np.exp(-((np.asarray(p) / (L / r)) ** 2)),
        lambda x, p: 1.0 / (1.0 + (g.min_image(np.asarray(x) - x0) / (r * L)) ** 2 + (np.asarray(p) * r / L) ** 2),
    ]
    for sym in symbols:
        a = Observable(func=sym, r=r, L=L)
        diff = operator_norm(wavepacket_quantize(a, env, g) - weyl_quantize(a, g))
        nrm, coarse = ck_norm(sym, 3, r, L, (0.0, g.length), (-np.pi, np.pi), dim=1)
        assert not coarse
        assert diff <= 0.5 * delta * nrm


# ---------------------------------------------------------------------------
# C^k norms
# ---------------------------------------------------------------------------


def test_ck_norm_constant():
    val, _ = ck_norm(lambda x, p: -3.0 + 0.0 * np.asarray(x) * np.asarray(p), 2, 8.0, 1.0, (0, 10), (-1, 1))
    assert val == pytest.approx(3.0)


def test_ck_norm_cosine_is_k_plus_one():
    r, L = 8.0, 2.0
    for k in (1, 2, 3):
        val, _ = ck_norm(lambda x, p: np.cos(np.asarray(x) / (r * L)) + 0.0 * np.asarray(p), k, r, L, (0, 4 * np.pi * r * L), (-1, 1), resolution=128)
        assert val == pytest.approx(k + 1, rel=5e-2)


def test_ck_norm_chain_rule_covariance():
    r, lam = 8.0, 2.0

    def a(x, p):
        return np.sin(np.asarray(x) / (r * 2.0)) + 0.0 * np.asarray(p)

    def a_scaled(x, p):
        return a(lam * np.asarray(x), p)

    v1, _ = ck_norm(a_scaled, 2, r, 1.0, (0, 10 * r), (-1, 1), resolution=96)
    v2, _ = ck_norm(a, 2, r, lam, (0, 20 * r), (-1, 1), resolution=96)
    assert v1 == pytest.approx(v2, rel=5e-2)


# ---------------------------------------------------------------------------
# Schur bound
# ---------------------------------------------------------------------------


def test_schur_bound_zero_kernel():
    assert schur_opnorm_bound(np.zeros((4, 4)), np.ones(4), np.ones(4)) == 0.0


def test_schur_bound_diagonal_cell():
    k = np.zeros((5, 5))
    k[2, 2] = 3.0
    w = np.full(5, 0.1)
    assert schur_opnorm_bound(k, w, w, overlap_constant=1.0) == pytest.approx(3.0 * 0.1)


def test_schur_bound_dominates_dense_oracle():
    g = Grid(n=64, dim=1, spacing=1.0)
    env = Envelope(r=4.0)
    stride = 4
    xs = g.x1d[::stride]
    ps = g.p1d[::8]
    nodes = [(x, p) for x in xs for p in ps]
    wq = (stride * g.spacing) * (8 * 2 * np.pi / g.length) / (2 * np.pi)
    cols = np.stack([make_wavepacket(PhasePoint([x], [p]), env, g) for (x, p) in nodes], axis=1)
    const = frame_overlap_constant(env, g, x_stride=1)
    rng = np.random.default_rng(42)
    for _ in range(20):
        kern = np.zeros((len(nodes), len(nodes)))
        for _ in range(10):
            i, j = rng.integers(0, len(nodes), size=2)
            kern[i, j] = rng.uniform(-2, 2)
        A = cols @ (kern * wq * wq) @ cols.conj().T * g.cell_volume
        bound = schur_opnorm_bound(kern, np.full(len(nodes), wq), np.full(len(nodes), wq), overlap_constant=const)
        assert bound >= operator_norm(A) * (1 - 1e-9)
