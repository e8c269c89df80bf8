"""Admissible random potentials on the periodic grid.

Three constructions are provided: a Gaussian field with prescribed compactly
supported covariance (spectral synthesis), a signed-bump lattice field, and a
Poisson bump field.  Localized Fourier amplitudes V̂_y(q) of the windowed
potential are the basic observables; for Gaussian fields their pair and
partition moments are evaluated exactly by convolution quadrature and the
Wick rule.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .grids import Grid, torus_distance


def smooth_bump(t: np.ndarray) -> np.ndarray:
    """C-infinity bump exp(1 - 1/(1-t^2)) supported in |t| < 1, height 1 at 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti**2))
    return out


def _radial_profile_on_grid(grid: Grid, profile, scale: float) -> np.ndarray:
    """Sample profile(|x|/scale) on the torus, centered at the origin."""
    xs = grid.x_mesh()
    r2 = sum(grid.min_image(x) ** 2 for x in xs)
    return profile(np.sqrt(r2) / scale)


@dataclass
class CorrelationProfile:
    """Two-point correlation R with its transform on the grid momentum lattice.

    `values` holds R sampled at grid displacements (origin-centered), and
    `fourier_R` its grid Fourier transform, which must be nonnegative up to
    tolerance for the Gaussian synthesis to be well posed.
    """

    grid: Grid
    values: np.ndarray
    support_radius: float
    fourier_R: np.ndarray = field(init=False)

    REJECT_TOL = 1e-8

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        reflected = np.roll(np.flip(vals), 1, axis=tuple(range(vals.ndim)))
        if not np.allclose(vals, reflected, atol=1e-12 * max(1.0, np.max(np.abs(vals)))):
            raise ValueError("correlation profile must be even")
        if vals.flat[0] < 0:
            raise ValueError("R(0) must be nonnegative")
        rhat = np.real(self.grid.to_fourier(vals))
        top = float(np.max(rhat)) if rhat.size else 0.0
        if top > 0 and float(np.min(rhat)) < -self.REJECT_TOL * top:
            raise ValueError("correlation profile rejected: R̂ is not positive definite on the grid")
        self.fourier_R = np.maximum(rhat, 0.0)

    @classmethod
    def from_bump(cls, grid: Grid, amplitude: float = 1.0, support_radius: float = 2.0):
        """Autocorrelation of a smooth bump: compactly supported with R̂ = |b̂|² ≥ 0."""
        if grid.length < 4.0 * support_radius:
            raise ValueError("grid extent must be at least 4x the correlation support radius")
        b = _radial_profile_on_grid(grid, smooth_bump, support_radius / 2.0)
        bhat = grid.to_fourier(b)
        rhat = np.abs(bhat) ** 2
        R = np.real(grid.from_fourier(rhat))
        R *= amplitude / R.flat[0]
        return cls(grid=grid, values=R, support_radius=support_radius)

    @classmethod
    def zero(cls, grid: Grid, support_radius: float = 1.0):
        return cls(grid=grid, values=np.zeros(grid.shape), support_radius=support_radius)

    def at_displacement(self, dx) -> float:
        idx = self.grid.nearest_index(np.asarray(dx, dtype=float))
        return float(self.values[idx])

    def fourier_at(self, q) -> float:
        """R̂ at an arbitrary momentum, by direct quadrature of the grid samples."""
        q = np.atleast_1d(np.asarray(q, dtype=float))
        xs = [self.grid.min_image(x) for x in self.grid.x_mesh()]
        phase = sum(-1j * q[i] * xs[i] for i in range(self.grid.dim))
        return float(np.real(self.grid.cell_volume * np.sum(self.values * np.exp(phase))))


@dataclass
class CutoffBump:
    """Window b_r(x) = b(x/r)/Z used to localize the potential near a point.

    Z normalizes the grid integral of b_r to 1.  The Fourier decay metadata
    (c, exponent) records the stretched-exponential decay class and is not
    enforced numerically.
    """

    r: float
    decay_c: float = 1.0
    decay_exponent: float = 0.999
    profile: object = smooth_bump

    def window(self, grid: Grid, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        xs = grid.x_mesh()
        r2 = sum(grid.min_image(xs[i] - y[i]) ** 2 for i in range(grid.dim))
        w = self.profile(np.sqrt(r2) / self.r)
        Z = grid.cell_volume * np.sum(w)
        if Z <= 0:
            raise ValueError("cutoff bump has empty support on this grid")
        return w / Z

    def integral(self, grid: Grid) -> float:
        return float(grid.cell_volume * np.sum(self.window(grid, np.zeros(grid.dim))))


@dataclass
class PotentialField:
    """One realization of the random potential on the grid."""

    values: np.ndarray
    grid: Grid
    kind: str
    seed: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("potential field contains non-finite values")


def _gaussian_field(corr: CorrelationProfile, grid: Grid, rng) -> np.ndarray:
    z = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    amp = np.sqrt(grid.length**grid.dim * corr.fourier_R)
    return np.real(grid.from_fourier(amp * z))


def _lattice_field(grid: Grid, rng, bump_radius: float, amplitude: float) -> np.ndarray:
    m = grid.spacing
    stride = int(round(1.0 / m))
    if abs(stride * m - 1.0) > 1e-12:
        raise ValueError("lattice construction requires the grid spacing to divide 1")
    impulses = np.zeros(grid.shape)
    n_sites = grid.n // stride
    signs = rng.integers(0, 2, size=(n_sites,) * grid.dim) * 2 - 1
    sl = (slice(None, None, stride),) * grid.dim
    impulses[sl] = signs / grid.cell_volume
    shift = rng.uniform(0.0, 1.0, size=grid.dim)
    v0 = amplitude * _radial_profile_on_grid(grid, smooth_bump, bump_radius)
    ps = grid.p_mesh()
    phase = np.exp(sum(-1j * ps[i] * shift[i] for i in range(grid.dim)))
    vhat = grid.to_fourier(impulses) * grid.to_fourier(v0) * phase
    return np.real(grid.from_fourier(vhat))


def _poisson_field(grid: Grid, rng, bump_radius: float, amplitude: float, intensity: float = 1.0) -> np.ndarray:
    v0 = amplitude * _radial_profile_on_grid(grid, smooth_bump, bump_radius)
    v0 -= np.mean(v0)  # enforce zero integral numerically
    count = rng.poisson(intensity * grid.length**grid.dim)
    impulses = np.zeros(grid.shape)
    for _ in range(count):
        pos = rng.uniform(0.0, grid.length, size=grid.dim)
        impulses[grid.nearest_index(pos)] += 1.0 / grid.cell_volume
    vhat = grid.to_fourier(impulses) * grid.to_fourier(v0)
    return np.real(grid.from_fourier(vhat))


def sample_potential(kind: str, corr, grid: Grid, seed: int, **params) -> PotentialField:
    """Draw one potential realization; bit-exact in (kind, params, grid, seed).

    For kind="gaussian", `corr` is a CorrelationProfile realized exactly (on
    the torus) by spectral synthesis.  For "lattice" and "poisson", `corr` is
    ignored and the construction parameters are bump_radius / amplitude.
    """
    rng = np.random.default_rng(seed)
    if kind == "gaussian":
        if not isinstance(corr, CorrelationProfile):
            raise TypeError("gaussian kind requires a CorrelationProfile")
        if grid.length < 4.0 * corr.support_radius:
            raise ValueError("grid extent must be at least 4x the correlation support radius")
        values = _gaussian_field(corr, grid, rng)
    elif kind == "lattice":
        values = _lattice_field(grid, rng, params.get("bump_radius", 0.5), params.get("amplitude", 1.0))
    elif kind == "poisson":
        values = _poisson_field(
            grid, rng, params.get("bump_radius", 0.5), params.get("amplitude", 1.0), params.get("intensity", 1.0)
        )
    else:
        raise ValueError(f"unknown potential kind {kind!r}")
    return PotentialField(values=values, grid=grid, kind=kind, seed=seed)


def empirical_covariance(fields: list, x, xp) -> float:
    """Unbiased sample covariance of V(x) and V(x') over an ensemble."""
    if not fields:
        raise ValueError("empty ensemble")
    grid = fields[0].grid
    for f in fields:
        if f.grid != grid:
            raise ValueError("all fields must share one grid")
    ix, ixp = grid.nearest_index(x), grid.nearest_index(xp)
    a = np.array([f.values[ix] for f in fields])
    b = np.array([f.values[ixp] for f in fields])
    n = len(fields)
    if n == 1:
        return float(a[0] * b[0])
    return float(np.sum((a - a.mean()) * (b - b.mean())) / (n - 1))


@dataclass
class LocalizedFourier:
    value: complex
    q_used: np.ndarray
    off_lattice: bool


def window_phase_vector(grid: Grid, y, q, bump: CutoffBump) -> np.ndarray:
    """Weight array w(x) e^{-iq.x} h^d so that V̂_y(q) = sum(V * weight)."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    w = bump.window(grid, y)
    xs = grid.x_mesh()
    phase = np.exp(sum(-1j * q[i] * xs[i] for i in range(grid.dim)))
    return w * phase * grid.cell_volume


def localized_fourier(field_: PotentialField, y, q, bump: CutoffBump) -> LocalizedFourier:
    """Discrete Fourier integral of the windowed potential, V̂_y(q)."""
    grid = field_.grid
    q_snap, off = grid.nearest_momentum(q)
    vec = window_phase_vector(grid, y, q_snap, bump)
    return LocalizedFourier(value=complex(np.sum(field_.values * vec)), q_used=q_snap, off_lattice=off)


def pair_moment(corr: CorrelationProfile, bump: CutoffBump, y, yp, q, qp) -> complex:
    """Exact E V̂_y(q) V̂_{y'}(q') for the Gaussian field, by convolution quadrature."""
    grid = corr.grid
    if torus_distance(grid, y, yp) > 2.0 * bump.r + corr.support_radius + grid.spacing:
        return 0.0 + 0.0j
    f = window_phase_vector(grid, y, q, bump)
    g = window_phase_vector(grid, yp, qp, bump)
    conv = np.fft.ifftn(np.fft.fftn(corr.values) * np.fft.fftn(g))
    return complex(np.sum(f * conv))


def all_pairings(items):
    """All perfect matchings of a list of indices."""
    items = list(items)
    if not items:
        yield []
        return
    first = items[0]
    rest = items[1:]
    for i, other in enumerate(rest):
        for tail in all_pairings(rest[:i] + rest[i + 1 :]):
            yield [(first, other)] + tail


def partition_moment(P, X, corr: CorrelationProfile, bump: CutoffBump) -> complex:
    """Product over cells of the Wick moment of each cell.

    P is a collection of disjoint index sets partitioning range(len(X)); X is
    the list of collision data (y_a, q_a).  Odd cells vanish by Wick; size-2
    cells reduce to pair_moment.
    """
    cells = [tuple(sorted(S)) for S in P]
    flat = sorted(itertools.chain.from_iterable(cells))
    if flat != list(range(len(X))):
        raise ValueError("P must partition the index set of X exactly")
    total = 1.0 + 0.0j
    for S in cells:
        if len(S) % 2 == 1:
            return 0.0 + 0.0j
        cell_sum = 0.0 + 0.0j
        for pairing in all_pairings(S):
            term = 1.0 + 0.0j
            for a, b in pairing:
                (ya, qa), (yb, qb) = X[a], X[b]
                term *= pair_moment(corr, bump, ya, yb, qa, qb)
            cell_sum += term
        total *= cell_sum
    return total
