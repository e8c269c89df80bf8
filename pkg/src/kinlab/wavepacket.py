"""Wavepacket frame, Wigner transform, quantizations, and operator norms.

Wavepackets are φ_{x,p}(y) = r^{-d/2} e^{ip.y} χ((x-y)/r) with a fixed
compactly supported envelope, L²-normalized on the grid.  The Wigner
transform is computed on a half-step spatial grid so that its momentum
marginal and the pairing with Weyl-quantized symbols are exact lattice
identities.  Operators are dense matrices acting on grid wavefunctions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Grid


def cos2_profile(t):
    """Polynomially smoothed cosine bump, supported in |t| <= 1.

    The squared cosine keeps the momentum spread of the packet small enough
    that free flight over times up to r^2/10 stays coherent.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.cos(0.5 * np.pi * t[inside]) ** 2
    return out


def cos4_profile(t):
    """Sharper variant of the smoothed cosine bump."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.cos(0.5 * np.pi * t[inside]) ** 4
    return out


@dataclass
class Envelope:
    """Radial envelope profile at wavepacket scale r, supported in B(0,1)."""

    r: float
    profile: object = cos2_profile

    def __call__(self, u):
        return self.profile(u)

    def l2_norm_unit_scale(self, dim: int, resolution: int = 4096) -> float:
        """L² norm of the unit-scale envelope, by fine radial quadrature."""
        t = (np.arange(resolution) + 0.5) / resolution
        vals = self.profile(t) ** 2
        if dim == 1:
            return float(np.sqrt(2.0 * np.sum(vals) / resolution))
        return float(np.sqrt(2.0 * np.pi * np.sum(vals * t) / resolution))


@dataclass
class PhasePoint:
    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        self.p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.p))):
            raise ValueError("phase point must be finite")


def phase_distance(xi: PhasePoint, eta: PhasePoint, r: float, grid: Grid) -> float:
    """d_r(ξ,η) = r^{-1}|Δx| + r|Δp| with torus-minimal displacements."""
    dx = grid.min_image(xi.x - eta.x)
    p_period = 2.0 * np.pi / grid.spacing
    dp = xi.p - eta.p
    dp = dp - p_period * np.round(dp / p_period)
    return float(np.linalg.norm(dx) / r + r * np.linalg.norm(dp))


def make_wavepacket(xi: PhasePoint, env: Envelope, grid: Grid) -> np.ndarray:
    """Grid wavefunction of the wavepacket at ξ, exactly normalized."""
    r = env.r
    if r < 4.0 * grid.spacing:
        raise ValueError("wavepacket scale must be at least 4 grid spacings")
    if 2.0 * r > grid.length:
        raise ValueError("wavepacket support does not fit the torus")
    xs = grid.x_mesh()
    r2 = sum(grid.min_image(xs[i] - xi.x[i]) ** 2 for i in range(grid.dim))
    phase = sum(1j * xi.p[i] * xs[i] for i in range(grid.dim))
    psi = r ** (-grid.dim / 2.0) * np.exp(phase) * env(np.sqrt(r2) / r)
    nrm = grid.norm(psi)
    if nrm == 0.0:
        raise ValueError("empty wavepacket")
    return psi / nrm


def refine_wavefunction(psi: np.ndarray, grid: Grid) -> np.ndarray:
    """Band-limited interpolation of ψ onto the half-step grid (2n per dim)."""
    n, d = grid.n, grid.dim
    ph = np.fft.fftn(psi)
    shape = (2 * n,) * d
    out = np.zeros(shape, dtype=complex)
    half = n // 2
    idx_map = np.concatenate([np.arange(0, half), np.arange(2 * n - half, 2 * n)])
    if d == 1:
        out[idx_map] = ph
    else:
        out[np.ix_(idx_map, idx_map)] = ph
    return np.fft.ifftn(out) * 2**d


def wigner_transform(psi: np.ndarray, grid: Grid, max_points: int = 1 << 21):
    """Wigner function W(x,p) on (half-step x-grid) x (momentum lattice).

    W(x,p) = h^d sum_u e^{-iu.p} conj(ψ)(x-u/2) ψ(x+u/2), the u-sum over one
    period.  Exact identities on the output: W is real, the p-marginal
    (1/L^d) sum_p W = |ψ(x)|², and the total mass is ||ψ||².
    """
    n, d, h = grid.n, grid.dim, grid.spacing
    if (2 * n) ** d * n**d > max_points:
        raise ValueError("grid too large for a full Wigner transform")
    fine = refine_wavefunction(psi, grid)
    # signed u-window: index j in [0,n) represents u = h*j for j < n/2 and
    # u = h*(j-n) otherwise, so the u-sum is symmetric about 0
    jj = np.where(np.arange(n) < n // 2, np.arange(n), np.arange(n) - n)
    if d == 1:
        i = np.arange(2 * n)[:, None]
        j = jj[None, :]
        C = fine[(i + j) % (2 * n)] * np.conj(fine[(i - j) % (2 * n)])
        W = h * np.fft.fft(C, axis=1)
    else:
        i1 = np.arange(2 * n)[:, None, None, None]
        i2 = np.arange(2 * n)[None, :, None, None]
        j1 = jj[None, None, :, None]
        j2 = jj[None, None, None, :]
        C = fine[(i1 + j1) % (2 * n), (i2 + j2) % (2 * n)] * np.conj(
            fine[(i1 - j1) % (2 * n), (i2 - j2) % (2 * n)]
        )
        W = h**2 * np.fft.fftn(C, axes=(2, 3))
    return W


def half_grid_coords(grid: Grid) -> np.ndarray:
    return 0.5 * grid.spacing * np.arange(2 * grid.n)


@dataclass
class Observable:
    """Classical symbol a(x,p) with its smoothness scales and support floor."""

    func: object
    r: float
    L: float = 1.0
    p_min: float = 0.0

    def __call__(self, x, p):
        return self.func(x, p)

    def values(self, grid: Grid) -> np.ndarray:
        """Samples on (half-step x-grid) x (momentum lattice), the layout
        shared with wigner_transform and weyl_quantize."""
        xs = half_grid_coords(grid)
        ps = grid.p1d
        if grid.dim == 1:
            shape = (2 * grid.n, grid.n)
            return np.broadcast_to(np.asarray(self.func(xs[:, None], ps[None, :]), dtype=complex), shape).copy()
        X1, X2, P1, P2 = np.meshgrid(xs, xs, ps, ps, indexing="ij")
        shape = (2 * grid.n, 2 * grid.n, grid.n, grid.n)
        return np.broadcast_to(np.asarray(self.func((X1, X2), (P1, P2)), dtype=complex), shape).copy()

    @classmethod
    def from_samples(cls, samples: np.ndarray, grid: Grid, r: float, L: float = 1.0, p_min: float = 0.0):
        """Wrap samples on the (half-grid x, lattice p) layout as a symbol
        via nearest-node lookup."""
        samples = np.asarray(samples)

        def func(x, p):
            xs = np.mod(np.round(np.asarray(x) / (0.5 * grid.spacing)).astype(int), 2 * grid.n)
            dp = 2.0 * np.pi / grid.length
            ks = np.mod(np.round(np.asarray(p) / dp).astype(int), grid.n)
            return samples[xs, ks]

        return cls(func=func, r=r, L=L, p_min=p_min)


def phase_pairing(a_vals: np.ndarray, W: np.ndarray, grid: Grid) -> complex:
    """∫ a W dx dp/(2π)^d on the shared (half-grid x, lattice p) layout."""
    wx = (0.5 * grid.spacing) ** grid.dim
    wp = 1.0 / grid.length**grid.dim
    return complex(np.sum(a_vals * W) * wx * wp)


def weyl_quantize(a: Observable, grid: Grid) -> np.ndarray:
    """Dense matrix of Op^w(a); the symbol is read at midpoints (x+y)/2.

    The matrix acts on coefficient vectors: (Op f)_x = sum_y M[x,y] f_y, with
    the h^d quadrature absorbed, so a ≡ 1 gives the identity matrix exactly.
    """
    n, d, h = grid.n, grid.dim, grid.spacing
    vals = a.values(grid)
    if d == 1:
        g = np.fft.ifft(vals, axis=1) / h  # g(m, u) = (1/L) sum_p a(m,p) e^{iup}
        ix = np.arange(n)
        mid = (ix[:, None] + ix[None, :]) % (2 * n)
        diff = (ix[:, None] - ix[None, :]) % n
        return g[mid, diff] * h
    g = np.fft.ifftn(vals, axes=(2, 3)) / h**2
    ix = np.arange(n)
    m1 = (ix[:, None] + ix[None, :]) % (2 * n)
    d1 = (ix[:, None] - ix[None, :]) % n
    M = g[m1[:, None, :, None], m1[None, :, None, :], d1[:, None, :, None], d1[None, :, None, :]]
    N = n * n
    return M.reshape(N, N) * h**2


def wavepacket_quantize(
    a: Observable,
    env: Envelope,
    grid: Grid,
    x_stride: int | None = None,
    strict: bool = True,
) -> np.ndarray:
    """Dense matrix of Op(a) = ∫ a(ξ) |ξ><ξ| dξ over the phase quadrature.

    The ξ_x nodes stride the spatial grid (spacing <= r/4) and ξ_p runs over
    the full momentum lattice (this requires spacing 2π/L <= 1/(4r)).  For
    each ξ_x the momentum sum collapses to a circulant, so the assembly costs
    one FFT plus one rank-structured update per spatial node.
    """
    r = env.r
    if x_stride is None:
        x_stride = max(1, int(r / (4.0 * grid.spacing)))
    if strict and x_stride * grid.spacing > r / 4.0 + 1e-12:
        raise ValueError("x-quadrature coarser than r/4")
    if strict and 2.0 * np.pi / grid.length > 1.0 / (4.0 * r) + 1e-12:
        raise ValueError("momentum lattice coarser than 1/(4r)")
    n, d, h = grid.n, grid.dim, grid.spacing
    wx = (x_stride * h) ** d
    N = grid.npoints
    out = np.zeros((N, N), dtype=complex)
    ix = np.arange(n)
    if d == 1:
        diff = (ix[:, None] - ix[None, :]) % n
        for x0 in grid.x1d[::x_stride]:
            win = make_wavepacket(PhasePoint([x0], [0.0]), env, grid)
            avals = np.asarray(np.broadcast_to(a.func(x0, grid.p1d), (n,)), dtype=complex)
            circ = np.fft.ifft(avals) / h  # (1/L) sum_p a e^{ipΔ} per lattice Δ
            out += wx * (win[:, None] * np.conj(win)[None, :]) * circ[diff]
    else:
        d1 = (ix[:, None] - ix[None, :]) % n
        P1, P2 = grid.p_mesh()
        for x0 in grid.x1d[::x_stride]:
            for x1 in grid.x1d[::x_stride]:
                win = make_wavepacket(PhasePoint([x0, x1], [0.0, 0.0]), env, grid).reshape(-1)
                avals = np.asarray(np.broadcast_to(a.func((x0, x1), (P1, P2)), (n, n)), dtype=complex)
                circ = np.fft.ifftn(avals) / h**2
                block = circ[d1[:, None, :, None], d1[None, :, None, :]].reshape(N, N)
                out += wx * (win[:, None] * np.conj(win)[None, :]) * block
    return out * grid.cell_volume


def operator_norm(M: np.ndarray, dense_cutoff: int = 1200, tol: float = 1e-6, max_iter: int = 500) -> float:
    """Spectral norm: exact SVD for small matrices, else power iteration."""
    M = np.asarray(M)
    if M.shape[0] <= dense_cutoff:
        return float(np.linalg.svd(M, compute_uv=False)[0])
    rng = np.random.default_rng(0)
    v = rng.standard_normal(M.shape[1]) + 1j * rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(max_iter):
        w = M.conj().T @ (M @ v)
        s = np.linalg.norm(w)
        if s == 0:
            return 0.0
        v = w / s
        val = np.sqrt(s)
        if abs(val - prev) <= tol * max(val, 1e-30):
            return float(val)
        prev = val
    return float(prev)


def ck_norm(
    func,
    k: int,
    r: float,
    L: float,
    x_box,
    p_box,
    resolution: int = 64,
    dim: int = 1,
):
    """Rescaled C^k norm by central finite differences on a phase box.

    Sum over multi-indices |α| <= k of sup |(rL ∂_x)^{αx} ((L/r) ∂_p)^{αp} a|.
    Returns (value, coarse_flag); the flag is set when the sampling box
    cannot resolve the scale rL (or L/r in momentum).
    """
    if dim != 1:
        raise NotImplementedError("ck_norm finite differences implemented for d=1 symbols")
    cx, cp = r * L, L / r
    hx = min(cx / 8.0, (x_box[1] - x_box[0]) / resolution)
    hp = min(cp / 8.0, (p_box[1] - p_box[0]) / resolution)
    coarse = hx > cx / 2.0 or hp > cp / 2.0
    xs = np.linspace(x_box[0], x_box[1], resolution)
    ps = np.linspace(p_box[0], p_box[1], resolution)
    X, P = np.meshgrid(xs, ps, indexing="ij")

    def deriv(ax, ap):
        total = np.zeros_like(X, dtype=complex)
        # central-difference tensor stencil of order (ax, ap)
        from math import comb

        for i in range(ax + 1):
            for j in range(ap + 1):
                coeff = comb(ax, i) * (-1) ** i * comb(ap, j) * (-1) ** j
                total += coeff * np.asarray(
                    func(X + (ax / 2.0 - i) * hx, P + (ap / 2.0 - j) * hp), dtype=complex
                )
        return total / (hx**ax * hp**ap)

    total = 0.0
    for ax in range(k + 1):
        for ap in range(k + 1 - ax):
            d = deriv(ax, ap)
            total += cx**ax * cp**ap * float(np.max(np.abs(d)))
    return total, coarse


def frame_overlap_constant(env: Envelope, grid: Grid, x_stride: int) -> float:
    """sup_ξ ∫ |<ξ|ξ'>| dξ' over the quadrature (by translation invariance,
    evaluated at a central node)."""
    center = PhasePoint(np.full(grid.dim, grid.length / 2.0), np.zeros(grid.dim))
    phi0 = make_wavepacket(center, env, grid)
    total = 0.0
    wx = (x_stride * grid.spacing) ** grid.dim
    wp = (2.0 * np.pi / grid.length) ** grid.dim / (2.0 * np.pi) ** grid.dim
    r = env.r
    for dx in np.arange(-3 * r, 3 * r + 1e-9, x_stride * grid.spacing):
        for pv in grid.p1d:
            xi = PhasePoint(center.x + dx, np.atleast_1d(pv))
            phi = make_wavepacket(xi, env, grid)
            total += abs(grid.inner(phi0, phi)) * wx * wp
    return float(total)


def schur_opnorm_bound(kernel: np.ndarray, weights_xi, weights_eta, overlap_constant: float = 1.0) -> float:
    """Schur bound C sqrt(sup_ξ ∫|a| dη · sup_η ∫|a| dξ) for the operator
    ∫ a(ξ,η) |ξ><η| dξ dη assembled on a phase quadrature."""
    kernel = np.abs(np.asarray(kernel))
    if kernel.size == 0 or not np.any(kernel):
        return 0.0
    row = float(np.max(kernel @ np.asarray(weights_eta)))
    col = float(np.max(np.asarray(weights_xi) @ kernel))
    return overlap_constant * float(np.sqrt(row * col))
