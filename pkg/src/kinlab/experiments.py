"""Reproducible desk-scale experiments binding all modules.

Each experiment function is pure given (parameters, seed) and returns a
dict with a `criteria` table (name -> bool) plus numeric rows for CSV
emission.  The CLI drives these; the acceptance suite calls them directly.
"""

from __future__ import annotations

import numpy as np

from .boltzmann import CollisionKernel, KineticState, ShellMesh, diffusion_diagnostics, isotropic_state, solve_boltzmann, boltzmann_series, transport
from .grids import Grid
from .potential import CorrelationProfile, CutoffBump, sample_potential
from .schrodinger import EvolutionParams, born_term, evolution_channel_mc, free_evolve, split_step_evolve
from .wavepacket import Envelope, Observable, PhasePoint, make_wavepacket, operator_norm, wavepacket_quantize, weyl_quantize, wigner_transform


def _spawn_seeds(seed: int, n: int):
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


# ---------------------------------------------------------------------------
# kinetic-compare: the quantum evolution against the dual Boltzmann flow
# ---------------------------------------------------------------------------


def _periodized_gaussian(grid: Grid, center, width: float) -> np.ndarray:
    xs = grid.x_mesh()
    d2 = sum(grid.min_image(xs[i] - center[i]) ** 2 for i in range(grid.dim))
    return np.exp(-d2 / width**2)


def _radial_window(rho: np.ndarray, p_center: float, half_width: float) -> np.ndarray:
    u = (rho - p_center) / half_width
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.cos(0.5 * np.pi * u[inside]) ** 2
    return out


def _wigner_at_lattice_points(psi: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """W_ψ(x, p) for all grid x, at the given momentum-lattice index pairs.

    Works on the band-limit-refined wavefunction so all half-step offsets
    contribute: W(x,p) = (1/L^d) sum_v ψ̂_f(p+v) conj(ψ̂_f(p-v)) e^{2iv.x},
    one inverse FFT per momentum point.  The result is the L/2-periodized
    Wigner function (ghost copies at half-torus translates), so pairings
    must use observables that vanish at the ghost sites.
    """
    from .wavepacket import refine_wavefunction

    n = grid.n
    nf = 2 * n
    hf = grid.spacing / 2.0
    fine = refine_wavefunction(psi, grid)
    ph = np.fft.fftn(fine)
    out = np.empty((len(points),) + grid.shape)
    quad = (4 * np.arange(n)) % nf
    scale = 2**grid.dim * hf ** (2 * grid.dim) * nf**grid.dim / grid.length**grid.dim
    for m, (k1, k2) in enumerate(points):
        # embed the original-lattice frequency index into the fine lattice
        f1 = k1 if k1 < n // 2 else k1 - n
        f2 = k2 if k2 < n // 2 else k2 - n
        kf1, kf2 = f1 % nf, f2 % nf
        fwd = np.roll(np.roll(ph, -kf1, axis=0), -kf2, axis=1)
        rev = np.roll(np.roll(ph[::-1, ::-1], kf1 + 1, axis=0), kf2 + 1, axis=1)
        w = np.fft.ifftn(fwd * np.conj(rev))
        out[m] = np.real(w[np.ix_(quad, quad)]) * scale
    return out


def kinetic_compare(
    eps_list=(0.4, 0.2),
    n: int = 128,
    n_samples: int = 50,
    seed: int = 0,
    t_factor: float = 0.5,
    n_angles: int = 32,
    n_radii: int = 7,
    p0: float = 1.0,
    corr_amplitude: float = 0.2,
    corr_radius: float = 3.0,
    g_width: float = 11.0,
    p_halfwidth: float = 0.4,
    dt: float = 0.04,
    spacing: float = 0.5,
) -> dict:
    """Observable error |<W_{ψ_t}, a0> - <W_{ψ0}, a_t>| per coupling.

    The observable is the product symbol a0 = g(x) cos(θ_p) χ(|p|); the
    quantum pairing uses the symmetrized operator ½(g m̂ + m̂ g), and the
    classical side evolves a0 with the dual Boltzmann flow on a stack of
    shells spanning the packet's radial spread, paired against the discrete
    Wigner function of ψ0.
    """
    grid = Grid(n=n, dim=2, spacing=spacing)
    corr = CorrelationProfile.from_bump(grid, amplitude=corr_amplitude, support_radius=corr_radius)
    center = np.array([grid.length / 2.0] * 2)
    g_spatial = _periodized_gaussian(grid, center, g_width)

    P1, P2 = grid.p_mesh()
    rho_lattice = np.sqrt(P1**2 + P2**2)
    theta_lattice = np.arctan2(P2, P1)
    m_lattice = np.cos(theta_lattice) * _radial_window(rho_lattice, p0, p_halfwidth)

    mesh = ShellMesh(radii=p0 + np.linspace(-p_halfwidth, p_halfwidth, n_radii), n_angles=n_angles, dim=2)
    rows = []
    for eps in eps_list:
        r = 1.0 / eps
        t = t_factor / eps**2
        env = Envelope(r=r)
        psi0 = make_wavepacket(PhasePoint(center, [p0, 0.0]), env, grid)

        # quantum side: MC over potentials of Re<m(p̂)ψ_t, g ψ_t>
        params = EvolutionParams(epsilon=eps, dt=dt, t=t, grid=grid)
        vals = []
        for s in _spawn_seeds(seed, n_samples):
            V = sample_potential("gaussian", corr, grid, seed=s)
            psi_t = split_step_evolve(psi0, V, params)
            m_psi = np.fft.ifftn(m_lattice * np.fft.fftn(psi_t))
            vals.append(float(np.real(grid.inner(m_psi, g_spatial * psi_t))))
        vals = np.array(vals)
        q_t = float(vals.mean())
        q_err = float(vals.std(ddof=1) / np.sqrt(n_samples))

        # classical side: dual Boltzmann evolution of a0 on the shell stack
        a0 = np.empty(grid.shape + (mesh.n_shells, mesh.n_angles))
        for si, rho in enumerate(mesh.radii):
            nodes = mesh.nodes(si)
            ang = np.cos(np.arctan2(nodes[:, 1], nodes[:, 0]))
            a0[..., si, :] = g_spatial[..., None] * (ang * _radial_window(np.full(mesh.n_angles, rho), p0, p_halfwidth))[None, None, :]
        state0 = KineticState(f=a0, grid=grid, mesh=mesh)
        kernel = CollisionKernel.build(eps, mesh, corr.fourier_at)
        dt_b = min(0.5, 0.1 / (eps**2 * kernel.max_K()))
        a_t = solve_boltzmann(state0, t, dt_b, kernel, orientation="dual")

        # pairing <W_{ψ0}, a_t> over the annulus of lattice momenta
        k1g, k2g = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        mask = np.abs(rho_lattice - p0) < p_halfwidth
        pts = np.stack([k1g[mask], k2g[mask]], axis=1)
        W0 = _wigner_at_lattice_points(psi0, grid, pts)
        rho_pts = rho_lattice[mask]
        th_pts = theta_lattice[mask]
        interp = _interp_shell_values(a_t.f, mesh, rho_pts, th_pts)
        c_t = float(np.sum(W0 * interp) * grid.cell_volume / grid.length**2)
        c_0 = float(
            np.sum(W0 * (np.cos(th_pts) * _radial_window(rho_pts, p0, p_halfwidth))[:, None, None] * g_spatial[None, :, :])
            * grid.cell_volume
            / grid.length**2
        )
        rows.append(
            {
                "epsilon": eps,
                "t": t,
                "quantum": q_t,
                "classical": c_t,
                "classical_t0": c_0,
                "err": abs(q_t - c_t),
                "mc_stderr": q_err,
                "n_samples": n_samples,
            }
        )
    out = {"rows": rows, "criteria": {}}
    if len(rows) >= 2:
        hi = max(rows, key=lambda rr: rr["epsilon"])
        lo = min(rows, key=lambda rr: rr["epsilon"])
        combined = hi["mc_stderr"] + lo["mc_stderr"]
        out["criteria"]["kinetic_error_decreases_30pct"] = bool(lo["err"] <= 0.7 * hi["err"] - combined)
    return out


def _interp_shell_values(f: np.ndarray, mesh: ShellMesh, rho, theta) -> np.ndarray:
    """Bilinear interpolation of shell-node values at (ρ, θ) points.

    Returns an array of shape (n_points,) + spatial shape.
    """
    radii = mesh.radii
    n_ang = mesh.n_angles
    dth = 2.0 * np.pi / n_ang
    out = None
    si = np.clip(np.searchsorted(radii, rho) - 1, 0, len(radii) - 2)
    wr = np.clip((rho - radii[si]) / (radii[si + 1] - radii[si]), 0.0, 1.0)
    ti = np.floor(np.mod(theta, 2 * np.pi) / dth).astype(int) % n_ang
    wt = np.mod(theta, 2 * np.pi) / dth - np.floor(np.mod(theta, 2 * np.pi) / dth)
    f_move = np.moveaxis(f, (-2, -1), (0, 1))  # (shells, angles, *spatial)
    term = (
        (1 - wr)[:, None, None] * (1 - wt)[:, None, None] * f_move[si, ti]
        + (1 - wr)[:, None, None] * wt[:, None, None] * f_move[si, (ti + 1) % n_ang]
        + wr[:, None, None] * (1 - wt)[:, None, None] * f_move[si + 1, ti]
        + wr[:, None, None] * wt[:, None, None] * f_move[si + 1, (ti + 1) % n_ang]
    )
    out = term
    return out


# ---------------------------------------------------------------------------
# semigroup-check
# ---------------------------------------------------------------------------


def semigroup_check(
    eps_list=(0.3, 0.2),
    eps2t: float = 0.2,
    n: int = 128,
    n_samples: int = 24,
    seed: int = 0,
    dt: float = 0.05,
) -> dict:
    """Defect ||E_{2t}[A] - E_t∘E_t[A]|| against the free-conjugation defect,
    and its decrease at smaller coupling (fixed ε² t)."""
    grid = Grid(n=n, dim=1, spacing=1.0)
    corr = CorrelationProfile.from_bump(grid, amplitude=1.0, support_radius=4.0)
    sampler = lambda s: sample_potential("gaussian", corr, grid, seed=s)
    rows = []
    for eps in eps_list:
        t = eps2t / eps**2
        r = max(4.0, 1.0 / eps)
        phi = make_wavepacket(PhasePoint([grid.length / 2], [1.0]), Envelope(r=r), grid)
        A = np.outer(phi, phi.conj()) * grid.cell_volume
        params = EvolutionParams(epsilon=eps, dt=dt, t=2 * t, grid=grid)

        halves = []
        for half_seed in _spawn_seeds(seed, 2):
            full = evolution_channel_mc(A, 2 * t, sampler, params, n_samples=max(10, n_samples // 2), seed=half_seed)
            refreshed = evolution_channel_mc(
                A, 2 * t, sampler, params, n_samples=max(10, n_samples // 2), seed=half_seed, refresh_schedule=(t,)
            )
            halves.append((full.mean, refreshed.mean))
        full_mean = (halves[0][0] + halves[1][0]) / 2
        refreshed_mean = (halves[0][1] + halves[1][1]) / 2
        defect = operator_norm(full_mean - refreshed_mean)
        spread = operator_norm(halves[0][0] - halves[0][1] - (halves[1][0] - halves[1][1])) / 2.0
        free = free_conjugation(A, 2 * t, grid)
        control = operator_norm(full_mean - free)
        rows.append({"epsilon": eps, "t": t, "defect": defect, "control": control, "mc_spread": spread})
    crit = {"defect_below_free_control": bool(all(rr["defect"] <= rr["control"] for rr in rows))}
    if len(rows) >= 2:
        hi = max(rows, key=lambda rr: rr["epsilon"])
        lo = min(rows, key=lambda rr: rr["epsilon"])
        crit["defect_decreases_with_epsilon"] = bool(lo["defect"] <= hi["defect"] + hi["mc_spread"] + lo["mc_spread"])
    return {"rows": rows, "criteria": crit}


def free_conjugation(A: np.ndarray, t: float, grid: Grid) -> np.ndarray:
    N = grid.npoints
    cols = free_evolve(np.eye(N, dtype=complex).reshape(grid.shape + (N,)), t, grid).reshape(N, N)
    return cols.conj().T @ A @ cols


# ---------------------------------------------------------------------------
# born scaling (criterion 6 heart)
# ---------------------------------------------------------------------------


def born_residual_scaling(
    eps_pair=(0.4, 0.2),
    n: int = 1024,
    n_samples: int = 50,
    t: float = 4.0,
    seed: int = 0,
    dt: float = 0.01,
) -> dict:
    grid = Grid(n=n, dim=1, spacing=1.0)
    corr = CorrelationProfile.from_bump(grid, amplitude=1.0, support_radius=4.0)
    psi = make_wavepacket(PhasePoint([grid.length / 2], [1.0]), Envelope(r=16.0), grid)
    res = {}
    for eps in eps_pair:
        vals = []
        for s in _spawn_seeds(seed, n_samples):
            V = sample_potential("gaussian", corr, grid, seed=s)
            exact = split_step_evolve(psi, V, EvolutionParams(epsilon=eps, dt=dt, t=t, grid=grid))
            approx = sum(born_term(k, V, psi, t, eps) for k in (0, 1, 2))
            vals.append(grid.norm(exact - approx))
        res[eps] = float(np.mean(vals))
    hi, lo = max(eps_pair), min(eps_pair)
    ratio = res[hi] / res[lo]
    return {
        "rows": [{"epsilon": e, "residual": res[e], "n_samples": n_samples} for e in eps_pair],
        "ratio": ratio,
        "criteria": {"born_ratio_at_least_2^2.5": bool(ratio >= 2**2.5)},
    }


# ---------------------------------------------------------------------------
# path statistics
# ---------------------------------------------------------------------------


def path_stats(
    eps_list=(0.4, 0.3, 0.2),
    eps2t: float = 4.0,
    n_paths: int = 600,
    seed: int = 0,
    n_grid: int = 32,
    n_angles: int = 12,
    corr_amplitude: float = 0.3,
) -> dict:
    from .pathspace import sample_paths_mc

    grid = Grid(n=n_grid, dim=2, spacing=1.0)
    corr = CorrelationProfile.from_bump(grid, amplitude=corr_amplitude, support_radius=3.0)
    mesh = ShellMesh(radii=[1.0], n_angles=n_angles, dim=2)
    rows = []
    for eps in eps_list:
        kernel = CollisionKernel.build(eps, mesh, corr.fourier_at)
        t = eps2t / eps**2
        ens = sample_paths_mc(t, eps, kernel, n=n_paths, seed=seed)
        rows.append(
            {
                "epsilon": eps,
                "t": t,
                "n_paths": n_paths,
                "rate_recollision": ens.rate_recollision,
                "rate_tube": ens.rate_tube,
                "rate_cone": ens.rate_cone,
                "rate_ladder_verdict": float("nan"),
                "mean_collisions": ens.mean_collisions,
            }
        )
    rates = [rr["rate_recollision"] for rr in sorted(rows, key=lambda rr: -rr["epsilon"])]
    return {
        "rows": rows,
        "criteria": {"recollision_rate_strictly_decreasing": bool(all(rates[i] > rates[i + 1] for i in range(len(rates) - 1)))},
    }


# ---------------------------------------------------------------------------
# boltzmann suite
# ---------------------------------------------------------------------------


def boltzmann_suite(
    eps_list=(0.4, 0.2),
    n_grid: int = 32,
    n_angles: int = 16,
    seed: int = 0,
    corr_amplitude: float = 0.15,
) -> dict:
    grid = Grid(n=n_grid, dim=2, spacing=1.0)
    corr = CorrelationProfile.from_bump(grid, amplitude=corr_amplitude, support_radius=3.0)
    mesh = ShellMesh(radii=[1.0], n_angles=n_angles, dim=2)
    rng = np.random.default_rng(seed)
    X, Y = grid.x_mesh()
    w = 2 * np.pi / grid.length
    f = 2.0 + np.cos(w * X) * (1.0 + 0.5 * np.cos(2 * np.pi * np.arange(n_angles) / n_angles))[None, None, :] * np.ones(grid.shape)[..., None]
    state = KineticState(f=np.broadcast_to(f[..., None, :], grid.shape + (1, n_angles)).copy(), grid=grid, mesh=mesh)

    criteria = {}
    rows = []
    eps0 = max(eps_list)
    kernel = CollisionKernel.build(eps0, mesh, corr.fourier_at)

    # collision-step mass conservation
    from .boltzmann import collision_operator

    L = collision_operator(state, kernel)
    criteria["collision_mass_conserved_1e-12"] = bool(abs(KineticState(f=L.f, grid=grid, mesh=mesh).mass()) < 1e-12 * max(1.0, abs(state.mass())))

    # isotropic equilibrium stationarity
    iso = isotropic_state(grid, mesh)
    out = solve_boltzmann(iso, 5.0, 0.05, kernel)
    criteria["isotropic_equilibrium_stationary_1e-10"] = bool(np.abs(out.f - iso.f).max() < 1e-10)

    # series decay with stable constant
    cs = {}
    for eps in eps_list:
        ker = CollisionKernel.build(eps, mesh, corr.fourier_at)
        t = 0.1 / eps**2
        _, norms = boltzmann_series(state, t, 4, ker, n_steps=64)
        budget = eps**2 * t * ker.max_K()
        ratios = [norms[j + 1] / norms[j] for j in range(len(norms) - 1)]
        cs[eps] = max(ratios) / budget
        rows.append({"epsilon": eps, "t": t, "max_ratio": max(ratios), "budget": budget})
    criteria["series_decay_bounded"] = bool(all(rr["max_ratio"] <= rr["budget"] for rr in rows))
    hi, lo = max(eps_list), min(eps_list)
    criteria["series_constant_stable"] = bool(0.2 < cs[hi] / cs[lo] < 5.0)

    # solver vs series at eps^2 t = 0.1
    t = 0.1 / eps0**2
    sol = solve_boltzmann(state, t, 0.05, kernel)
    ser, _ = boltzmann_series(state, t, 6, kernel, n_steps=256)
    criteria["solver_matches_series_1e-4"] = bool(np.abs(sol.f - ser.f).max() < 1e-4)

    # mass drift over 1000 steps
    out = solve_boltzmann(state, 10.0, 0.01, kernel)
    criteria["solver_mass_drift_1e-10"] = bool(abs(out.mass() - state.mass()) <= 1e-10 * abs(state.mass()))

    # diffusion cross-check
    est = diffusion_diagnostics(kernel, horizon=100.0 / (eps0**2 * kernel.max_K()), n_walkers=400, seed=seed)
    criteria["diffusion_gk_vs_msd_10pct"] = bool(abs(est.D_msd / est.D_green_kubo - 1.0) < 0.10)
    rows.append({"epsilon": eps0, "D_GK": est.D_green_kubo, "D_MSD": est.D_msd, "horizon": est.horizon})
    return {"rows": rows, "criteria": criteria}
