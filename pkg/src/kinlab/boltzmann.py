"""Linear Boltzmann equation on energy shells.

Momentum space is discretized as shells |p| = const with equi-angular nodes
(d=2; a two-node shell covers d=1).  The elastic delta collapses to an
intra-shell kernel A_ij = R̂(p_i - p_j) ω_j / (2|p|), whose row sums are the
cross section K(p); the collision operator is the gain-loss form
Lf = ε² (A f - K f), which conserves the per-shell mass exactly.  Transport
is an exact spectral shift per node.  The orientation flag selects between
the forward equation (∂_t f + p.∇f = Lf) and its dual (∂_t a - p.∇a = La).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import Grid


@dataclass
class ShellMesh:
    """Shell radii and angular nodes of the momentum discretization."""

    radii: np.ndarray
    n_angles: int
    dim: int = 2

    def __post_init__(self):
        self.radii = np.atleast_1d(np.asarray(self.radii, dtype=float))
        if np.any(self.radii <= 0):
            raise ValueError("shell radii must be positive")
        if self.dim == 1 and self.n_angles != 2:
            raise ValueError("d=1 shells have exactly two nodes")

    @property
    def n_shells(self) -> int:
        return len(self.radii)

    def nodes(self, s: int) -> np.ndarray:
        """Momentum vectors of shell s, shape (n_angles, dim)."""
        rho = self.radii[s]
        if self.dim == 1:
            return np.array([[rho], [-rho]])
        th = 2.0 * np.pi * np.arange(self.n_angles) / self.n_angles
        return rho * np.stack([np.cos(th), np.sin(th)], axis=1)

    def weights(self, s: int) -> np.ndarray:
        """Surface-measure weights; they sum to the shell measure."""
        rho = self.radii[s]
        if self.dim == 1:
            return np.ones(2)
        return np.full(self.n_angles, 2.0 * np.pi * rho / self.n_angles)


@dataclass
class KineticState:
    """Phase-space density f on (spatial grid) x (shells x angular nodes)."""

    f: np.ndarray
    grid: Grid
    mesh: ShellMesh

    def __post_init__(self):
        want = self.grid.shape + (self.mesh.n_shells, self.mesh.n_angles)
        if self.f.shape != want:
            raise ValueError(f"state shape {self.f.shape} != {want}")
        if not np.all(np.isfinite(self.f)):
            raise ValueError("kinetic state must be finite")

    def copy(self) -> "KineticState":
        return KineticState(f=self.f.copy(), grid=self.grid, mesh=self.mesh)

    def mass(self) -> float:
        total = 0.0
        for s in range(self.mesh.n_shells):
            w = self.mesh.weights(s)
            total += float(np.sum(self.f[..., s, :] * w))
        return total * self.grid.cell_volume

    def shell_mass(self, s: int) -> np.ndarray:
        """Per-spatial-point mass of one shell."""
        return np.sum(self.f[..., s, :] * self.mesh.weights(s), axis=-1)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.f)))


@dataclass
class CollisionKernel:
    """Per-shell gain matrices and cross sections (ε² kept as an explicit
    prefactor; the matrices hold only the geometry and R̂)."""

    epsilon: float
    mesh: ShellMesh
    gain: list = field(default_factory=list)  # per shell: (n,n) matrix A
    K: list = field(default_factory=list)  # per shell: row sums of A

    @classmethod
    def build(cls, epsilon: float, mesh: ShellMesh, rhat) -> "CollisionKernel":
        """rhat(q) is R̂ at the momentum-transfer vector q (even function)."""
        gain, K = [], []
        for s in range(mesh.n_shells):
            nodes = mesh.nodes(s)
            w = mesh.weights(s)
            n = len(nodes)
            G = np.empty((n, n))
            for i in range(n):
                for j in range(n):
                    G[i, j] = rhat(nodes[i] - nodes[j])
            if not np.allclose(G, G.T, atol=1e-10 * max(1.0, np.abs(G).max())):
                raise ValueError("scattering kernel must be symmetric")
            A = G * w[None, :] / (2.0 * mesh.radii[s])
            gain.append(A)
            K.append(A.sum(axis=1))
        return cls(epsilon=epsilon, mesh=mesh, gain=gain, K=K)

    def max_K(self) -> float:
        return max(float(np.max(k)) for k in self.K)

    def generator(self, s: int) -> np.ndarray:
        """ε² (A - diag K) for shell s."""
        return self.epsilon**2 * (self.gain[s] - np.diag(self.K[s]))


def collision_operator(state: KineticState, kernel: CollisionKernel) -> KineticState:
    """Lf = ε² (gain - loss), shell by shell; exact mass conservation."""
    if kernel.mesh is not state.mesh and (
        kernel.mesh.n_shells != state.mesh.n_shells
        or kernel.mesh.n_angles != state.mesh.n_angles
        or not np.array_equal(kernel.mesh.radii, state.mesh.radii)
    ):
        raise ValueError("kernel was built for a different shell mesh")
    out = np.empty_like(state.f)
    for s in range(state.mesh.n_shells):
        fs = state.f[..., s, :]
        out[..., s, :] = kernel.epsilon**2 * (fs @ kernel.gain[s].T - fs * kernel.K[s])
    return KineticState(f=out, grid=state.grid, mesh=state.mesh)


def _shift_multiplier(grid: Grid, shift: np.ndarray) -> np.ndarray:
    """Spectral-shift phase; the unpaired Nyquist mode gets the real part so
    that shifting a real field stays exactly real."""
    pny = np.pi / grid.spacing
    mult = np.ones(grid.shape, dtype=complex)
    for i in range(grid.dim):
        p = grid.p_mesh()[i]
        m = np.exp(-1j * p * shift[i])
        m = np.where(np.isclose(np.abs(p), pny), np.cos(p * shift[i]), m)
        mult = mult * m
    return mult


def transport(state: KineticState, s_time: float, orientation: str = "forward") -> KineticState:
    """Free streaming f(x,p) -> f(x - s p, p) (or x + s p for the dual),
    implemented as an exact spectral shift per node."""
    sign = {"forward": 1.0, "dual": -1.0}[orientation]
    grid = state.grid
    axes = tuple(range(grid.dim))
    out = np.empty_like(state.f, dtype=float)
    for sh in range(state.mesh.n_shells):
        nodes = state.mesh.nodes(sh)
        for j, v in enumerate(nodes):
            mult = _shift_multiplier(grid, sign * s_time * v)
            out[..., sh, j] = np.real(np.fft.ifftn(mult * np.fft.fftn(state.f[..., sh, j], axes=axes), axes=axes))
    return KineticState(f=out, grid=grid, mesh=state.mesh)


def _gl_nodes(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def duhamel_terms_classical(a0: KineticState, t: float, kernel: CollisionKernel, nodes: int = 24):
    """First three dual Duhamel terms (T0 a, T1 a, T2 a).

    T0 a = a(x+tp, p); T1 is the gain integral over the collision time; and
    T2 a = -ε² t K(p) a(x+tp, p) is the loss term.
    """
    grid, mesh = a0.grid, a0.mesh
    T0 = transport(a0, t, orientation="dual")
    T2 = KineticState(f=np.empty_like(a0.f), grid=grid, mesh=mesh)
    for s in range(mesh.n_shells):
        T2.f[..., s, :] = -kernel.epsilon**2 * t * kernel.K[s] * T0.f[..., s, :]
    # gain: T1 = eps^2 int_0^t sum_j A_ij a0_j(x + s p_i + (t-s) q_j) ds
    axes = tuple(range(grid.dim))
    ps = grid.p_mesh()
    T1 = KineticState(f=np.zeros_like(a0.f), grid=grid, mesh=mesh)
    sq, wq = _gl_nodes(0.0, t, nodes)
    for sh in range(mesh.n_shells):
        nodes_sh = mesh.nodes(sh)
        fhat = [np.fft.fftn(a0.f[..., sh, j], axes=axes) for j in range(len(nodes_sh))]
        for i, pi in enumerate(nodes_sh):
            acc = np.zeros(grid.shape, dtype=complex)
            for j, qj in enumerate(nodes_sh):
                Aij = kernel.gain[sh][i, j]
                if Aij == 0.0:
                    continue
                for s_val, w_val in zip(sq, wq):
                    shift = s_val * pi + (t - s_val) * qj
                    phase = np.exp(sum(1j * ps[d] * shift[d] for d in range(grid.dim)))
                    acc += (w_val * Aij) * (phase * fhat[j])
            T1.f[..., sh, i] = kernel.epsilon**2 * np.real(np.fft.ifftn(acc, axes=axes))
    return T0, T1, T2


def boltzmann_series(
    f0: KineticState,
    t: float,
    j_max: int,
    kernel: CollisionKernel,
    n_steps: int = 128,
    orientation: str = "forward",
    check_decay: bool = True,
):
    """Duhamel series f ≈ sum_j g_j with g_0 = transport and
    g_{j+1}(t) = ∫_0^t T_s L g_j(t-s) ds, integrated term by term.

    Returns (partial_sum_state, [sup-norm of each g_j]).
    """
    if kernel.epsilon**2 * t * kernel.max_K() >= 0.5:
        raise ValueError("series requires eps^2 t max K < 0.5")
    dt = t / n_steps
    Tdt = lambda st: transport(st, dt, orientation)
    # g_prev holds g_j at every time node; stepping uses the local Duhamel
    # identity g_{j+1}(t_m) = T_dt g_{j+1}(t_{m-1}) + trapezoid of T L g_j
    g_prev = [f0.copy()]
    for m in range(n_steps):
        g_prev.append(Tdt(g_prev[-1]))
    norms = [g_prev[-1].sup_norm()]
    total = g_prev[-1].copy()
    prev_ratio_bad = 0
    for j in range(1, j_max + 1):
        Lg = [collision_operator(st, kernel) for st in g_prev]
        g_next = [KineticState(f=np.zeros_like(f0.f), grid=f0.grid, mesh=f0.mesh)]
        for m in range(n_steps):
            stepped = Tdt(g_next[-1])
            incr = 0.5 * dt * (Tdt(Lg[m]).f + Lg[m + 1].f)
            g_next.append(KineticState(f=stepped.f + incr, grid=f0.grid, mesh=f0.mesh))
        norms.append(g_next[-1].sup_norm())
        total = KineticState(f=total.f + g_next[-1].f, grid=f0.grid, mesh=f0.mesh)
        if check_decay and norms[-2] > 0 and norms[-1] / max(norms[-2], 1e-300) > 1.0:
            prev_ratio_bad += 1
            if prev_ratio_bad >= 3:
                raise RuntimeError("series divergence detected")
        else:
            prev_ratio_bad = 0
        g_prev = g_next
    return total, norms


def solve_boltzmann(
    f0: KineticState,
    t: float,
    dt: float,
    kernel: CollisionKernel,
    orientation: str = "forward",
) -> KineticState:
    """Strang splitting of transport and the exact per-shell collision
    exponential; mass-conservative and unconditionally stable."""
    if dt * kernel.epsilon**2 * kernel.max_K() > 0.1:
        raise ValueError("dt too large: dt * eps^2 * max K must be <= 0.1")
    n = max(1, int(round(t / dt)))
    dt = t / n
    expQ = []
    for s in range(f0.mesh.n_shells):
        Q = kernel.generator(s)
        evals, evecs = np.linalg.eigh(Q)
        expQ.append((evecs * np.exp(dt * evals)) @ evecs.T)
    state = f0.copy()
    for _ in range(n):
        state = transport(state, dt / 2.0, orientation)
        for s in range(f0.mesh.n_shells):
            state.f[..., s, :] = state.f[..., s, :] @ expQ[s].T
        state = transport(state, dt / 2.0, orientation)
    return state


@dataclass
class DiffusionEstimate:
    D_green_kubo: float
    D_msd: float
    horizon: float
    mean_free_time: float
    flagged: bool


def _jump_process_positions(kernel: CollisionKernel, shell: int, horizon: float, n_walkers: int, seed: int, n_snapshots: int = 32):
    """Sample velocity-jump trajectories; returns (times, positions array)."""
    mesh = kernel.mesh
    nodes = mesh.nodes(shell)
    A = kernel.gain[shell]
    K = kernel.K[shell]
    rng = np.random.default_rng(seed)
    nv = len(nodes)
    times = np.linspace(0.0, horizon, n_snapshots + 1)[1:]
    pos = np.zeros((n_walkers, len(times), mesh.dim))
    for w in range(n_walkers):
        t_now, x = 0.0, np.zeros(mesh.dim)
        i = int(rng.integers(0, nv))
        snap = 0
        while snap < len(times):
            rate = kernel.epsilon**2 * K[i]
            wait = rng.exponential(1.0 / rate) if rate > 0 else np.inf
            t_next = t_now + wait
            while snap < len(times) and times[snap] <= t_next:
                pos[w, snap] = x + (times[snap] - t_now) * nodes[i]
                snap += 1
            if t_next >= horizon:
                break
            x = x + wait * nodes[i]
            t_now = t_next
            i = int(rng.choice(nv, p=A[i] / K[i]))
    return times, pos


def diffusion_diagnostics(
    kernel: CollisionKernel,
    shell: int = 0,
    horizon: float = 200.0,
    n_walkers: int = 400,
    seed: int = 0,
) -> DiffusionEstimate:
    """Green-Kubo and MSD estimates of the spatial diffusion coefficient of
    the shell jump process; the two must agree within ~10%."""
    mesh = kernel.mesh
    nodes = mesh.nodes(shell)
    nv = len(nodes)
    Q = kernel.generator(shell)
    mean_free = 1.0 / (kernel.epsilon**2 * float(np.mean(kernel.K[shell])))
    flagged = horizon < 20.0 * mean_free
    # Green-Kubo: D = pi v_x . (-Q)^+ v_x with pi uniform on the shell
    pi = np.full(nv, 1.0 / nv)
    D_axes = []
    for axis in range(mesh.dim):
        v = nodes[:, axis]
        v0 = v - np.sum(pi * v)
        u = np.linalg.lstsq(-Q, v0, rcond=None)[0]
        u -= np.sum(pi * u)
        D_axes.append(float(np.sum(pi * v0 * u)))
    D_gk = float(np.mean(D_axes))
    times, pos = _jump_process_positions(kernel, shell, horizon, n_walkers, seed)
    msd = np.mean(np.sum(pos**2, axis=2), axis=0)
    sel = times >= horizon / 2.0
    slope = np.linalg.lstsq(np.vstack([times[sel], np.ones(sel.sum())]).T, msd[sel], rcond=None)[0][0]
    D_msd = float(slope / (2.0 * mesh.dim))
    return DiffusionEstimate(
        D_green_kubo=D_gk, D_msd=D_msd, horizon=horizon, mean_free_time=mean_free, flagged=flagged
    )


def isotropic_state(grid: Grid, mesh: ShellMesh, profile=None) -> KineticState:
    """Spatially varying, shell-isotropic state (default: uniform)."""
    f = np.ones(grid.shape + (mesh.n_shells, mesh.n_angles))
    if profile is not None:
        f = f * profile[..., None, None]
    return KineticState(f=f, grid=grid, mesh=mesh)
