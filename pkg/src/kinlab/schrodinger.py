"""Time evolution under H = -Δ/2 + εV and the evolution channel.

The propagator is e^{-itH} via Strang splitting of the kinetic and potential
factors (both exact exponentials, so each step is exactly unitary).  Born
terms T_k are the k-collision Duhamel integrals, evaluated by nested
Gauss-Legendre quadrature.  The evolution channel E_t[A] = E U_t^* A U_t is
estimated by Monte Carlo over potential realizations, optionally with the
potential refreshed (resampled independently) at scheduled times.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import Grid
from .potential import PotentialField


@dataclass
class EvolutionParams:
    epsilon: float
    dt: float
    t: float
    grid: Grid
    scheme: str = "strang"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        pmax2 = float(np.max(self.grid.p_squared()))
        if self.dt * pmax2 / 2.0 >= np.pi:
            raise ValueError("aliasing guard violated: dt * max|p|^2/2 must be < pi")

    @property
    def n_steps(self) -> int:
        n = max(1, int(round(self.t / self.dt)))
        return n


def free_evolve(psi: np.ndarray, s: float, grid: Grid) -> np.ndarray:
    """e^{isΔ/2} ψ: exact spectral multiplier e^{-is|p|^2/2} on the lattice."""
    mult = np.exp(-0.5j * s * grid.p_squared())
    return np.fft.ifftn(mult * np.fft.fftn(psi, axes=tuple(range(grid.dim))), axes=tuple(range(grid.dim)))


def split_step_evolve(psi: np.ndarray, V: PotentialField, params: EvolutionParams) -> np.ndarray:
    """Strang-split propagation of ψ to time t (norm-preserving)."""
    grid = params.grid
    n = params.n_steps
    dt = params.t / n
    if dt * float(np.max(grid.p_squared())) / 2.0 >= np.pi:
        raise ValueError("aliasing guard violated")
    axes = tuple(range(grid.dim))
    half_v = np.exp(-0.5j * params.epsilon * V.values * dt)
    kin = np.exp(-0.5j * dt * grid.p_squared())
    # potential values broadcast over trailing axes when psi carries a batch
    if psi.ndim > grid.dim:
        half_v = half_v[..., None]
        kin = kin[..., None]
    out = psi.astype(complex)
    for _ in range(n):
        out = half_v * out
        out = np.fft.ifftn(kin * np.fft.fftn(out, axes=axes), axes=axes)
        out = half_v * out
    return out


def propagator_matrix(V: PotentialField, params: EvolutionParams) -> np.ndarray:
    """Dense matrix of e^{-itH} (columns = evolved basis vectors)."""
    grid = params.grid
    N = grid.npoints
    ident = np.eye(N, dtype=complex).reshape(grid.shape + (N,))
    cols = split_step_evolve(ident, V, params)
    return cols.reshape(N, N)


def _gl_nodes(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def born_term(k: int, V: PotentialField, psi: np.ndarray, t: float, epsilon: float, nodes: int = 16) -> np.ndarray:
    """Duhamel term T_k(t)ψ for k collisions (k <= 2), homogeneous of degree
    k in εV.  T_0 is the free evolution."""
    grid = V.grid
    if k == 0:
        return free_evolve(psi, t, grid)
    if nodes < 16:
        raise ValueError("at least 16 quadrature nodes per time dimension")
    if k == 1:
        s0, w0 = _gl_nodes(0.0, t, nodes)
        out = np.zeros_like(psi, dtype=complex)
        for s, w in zip(s0, w0):
            out += w * free_evolve(V.values * free_evolve(psi, s, grid), t - s, grid)
        return -1j * epsilon * out
    if k == 2:
        s0, w0 = _gl_nodes(0.0, t, nodes)
        out = np.zeros_like(psi, dtype=complex)
        for sa, wa in zip(s0, w0):
            psi_a = V.values * free_evolve(psi, sa, grid)
            s1, w1 = _gl_nodes(0.0, t - sa, nodes)
            for sb, wb in zip(s1, w1):
                out += wa * wb * free_evolve(V.values * free_evolve(psi_a, sb, grid), t - sa - sb, grid)
        return (-1j * epsilon) ** 2 * out
    raise ValueError("born_term implemented for k <= 2")


@dataclass
class ChannelEstimate:
    mean: np.ndarray
    n_samples: int
    stderr_max: float
    stderr_fro: float
    flagged: bool = False


def evolution_channel_mc(
    A: np.ndarray,
    t: float,
    potential_sampler,
    params: EvolutionParams,
    n_samples: int,
    seed: int = 0,
    refresh_schedule: tuple = (),
    target_stderr: float | None = None,
) -> ChannelEstimate:
    """Monte Carlo estimate of E_t[A] = E e^{itH} A e^{-itH}.

    `potential_sampler(seed)` draws one PotentialField.  A nonempty
    refresh_schedule lists interior times at which an independent potential
    replaces the current one (the refreshed channel).  Aggregation is in a
    fixed sample order, so the result is bit-stable for a given seed.
    """
    if n_samples < 10:
        raise ValueError("need at least 10 samples")
    grid = params.grid
    times = [0.0] + sorted(refresh_schedule) + [t]
    if any(not 0.0 < s < t for s in refresh_schedule):
        raise ValueError("refresh times must lie strictly inside (0, t)")
    seeds = np.random.SeedSequence(seed).spawn(n_samples)
    acc = np.zeros_like(A, dtype=complex)
    acc2 = np.zeros(A.shape, dtype=float)
    for i in range(n_samples):
        child = np.random.SeedSequence(entropy=seeds[i].entropy, spawn_key=seeds[i].spawn_key)
        piece_seeds = child.spawn(len(times) - 1)
        U = np.eye(A.shape[0], dtype=complex)
        for j in range(len(times) - 1):
            seg = times[j + 1] - times[j]
            if seg <= 0:
                continue
            Vj = potential_sampler(int(piece_seeds[j].generate_state(1, np.uint64)[0]))
            pj = EvolutionParams(epsilon=params.epsilon, dt=params.dt, t=seg, grid=grid, scheme=params.scheme)
            U = propagator_matrix(Vj, pj) @ U
        sample = U.conj().T @ A @ U
        acc += sample
        acc2 += np.abs(sample) ** 2
    mean = acc / n_samples
    var = np.maximum(acc2 / n_samples - np.abs(mean) ** 2, 0.0)
    stderr = np.sqrt(var / n_samples)
    flagged = bool(target_stderr is not None and float(stderr.max()) > target_stderr)
    return ChannelEstimate(
        mean=mean,
        n_samples=n_samples,
        stderr_max=float(stderr.max()),
        stderr_fro=float(np.linalg.norm(stderr)),
        flagged=flagged,
    )
