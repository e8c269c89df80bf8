"""Phase-space path data model and geometric event detection.

A path ω = (s, p, y) records k collisions: durations s_0..s_k, momenta
p_0..p_k, and scattering locations y_1..y_k.  Extended paths chain N such
segments between phase-space checkpoints.  Detection covers recollisions
(immediate and not), tube alignments, cone events (decided by exhaustive
grid search over the momentum sphere), proximity clusters, and the derived
typical/atypical classification; the constraint checks are hard-threshold
verdicts with every violated clause reported.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .combinat import (
    Skeleton,
    canon,
    connected_components,
    default_weights,
    is_renormalized_ladder,
    min_spanning_forest,
)
from .potential import partition_moment


@dataclass
class Path:
    """One path segment: durations (k+1), momenta (k+1, d), collisions (k, d)."""

    s: np.ndarray
    p: np.ndarray
    y: np.ndarray
    t_total: float

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.p = np.atleast_2d(np.asarray(self.p, dtype=float))
        if self.p.shape[0] != len(self.s):
            raise ValueError("need one momentum per flight stretch")
        k = len(self.s) - 1
        y = np.asarray(self.y, dtype=float)
        self.y = y.reshape(k, -1) if k else np.zeros((0, self.p.shape[1]))
        if np.any(self.s < 0):
            raise ValueError("durations must be nonnegative")
        if abs(float(np.sum(self.s)) - self.t_total) > 1e-12 * max(1.0, self.t_total):
            raise ValueError("durations must sum to t_total")

    @property
    def k(self) -> int:
        return len(self.y)

    @property
    def dim(self) -> int:
        return self.p.shape[1]

    def collision_times(self, offset: float = 0.0) -> np.ndarray:
        return offset + np.cumsum(self.s)[:-1] if self.k else np.empty(0)


@dataclass
class PathParams:
    """Explicit thresholds for the constraint and event detectors."""

    alpha: float
    r: float
    sigma: float = 0.0
    beta: float = 10.0
    recollision_radius_factor: float = 2.0
    cluster_cross_factor: float = 2.0
    cluster_same_factor: float = 4.0
    tube_radius_factor: float = 2.0
    cone_pos_slack_factor: float = 2.0
    cone_kinetic_slack: float = 0.5
    cone_exclusion: float = 0.5
    cone_n_angles: int = 720
    cone_n_radii: int = 5
    immediate_momentum_factor: float = 10.0

    def __post_init__(self):
        for name in ("alpha", "r", "beta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def recollision_radius(self) -> float:
        return self.recollision_radius_factor * self.r

    @property
    def tube_radius(self) -> float:
        return self.tube_radius_factor * self.r

    @property
    def cone_pos_slack(self) -> float:
        return self.cone_pos_slack_factor * self.r


@dataclass
class ConstraintVerdict:
    member: bool
    violations: list


def check_path_constraints(omega: Path, params: PathParams, xi, eta) -> ConstraintVerdict:
    """Hard-cutoff membership test for the constrained path set.

    xi and eta are the endpoint phase points (x, p) as pairs of arrays.
    Every violated clause is reported.
    """
    a, r = params.alpha, params.r
    xi_x, xi_p = (np.asarray(v, dtype=float) for v in xi)
    eta_x, eta_p = (np.asarray(v, dtype=float) for v in eta)
    v = []
    k = omega.k
    for j in range(1, k):
        resid = np.linalg.norm(omega.y[j] - (omega.y[j - 1] + omega.s[j] * omega.p[j]))
        if resid > a * r:
            v.append(("transport", j, float(resid)))
    for j in range(k + 1):
        for jp in range(j + 1, k + 1):
            lhs = abs(np.dot(omega.p[j], omega.p[j]) / 2 - np.dot(omega.p[jp], omega.p[jp]) / 2)
            cap = a * max(
                1.0 / max(omega.s[j], 1e-300),
                1.0 / max(omega.s[jp], 1e-300),
                np.linalg.norm(omega.p[j]) / r,
                a / r**2,
            )
            if lhs > cap:
                v.append(("kinetic_energy", (j, jp), float(lhs)))
    if k > 0:
        if np.linalg.norm(omega.y[0] - (xi_x + omega.s[0] * omega.p[0])) > a * r:
            v.append(("endpoint_entry", 0, float(np.linalg.norm(omega.y[0] - (xi_x + omega.s[0] * omega.p[0])))))
        if np.linalg.norm(eta_x - (omega.y[-1] + omega.s[-1] * omega.p[-1])) > a * r:
            v.append(("endpoint_exit", k, 0.0))
    else:
        if np.linalg.norm(eta_x - (xi_x + omega.s[0] * omega.p[0])) > a * r:
            v.append(("endpoint_exit", 0, 0.0))
    if np.linalg.norm(omega.p[0] - xi_p) > a / r:
        v.append(("momentum_entry", 0, float(np.linalg.norm(omega.p[0] - xi_p))))
    if np.linalg.norm(omega.p[-1] - eta_p) > a / r:
        v.append(("momentum_exit", k, 0.0))
    if omega.s[0] < params.sigma:
        v.append(("boundary_flight_entry", 0, float(omega.s[0])))
    if omega.s[-1] < params.sigma:
        v.append(("boundary_flight_exit", k, float(omega.s[-1])))
    return ConstraintVerdict(member=not v, violations=v)


def path_phase(omega: Path) -> float:
    """φ(ω) = sum s_j |p_j|²/2 + sum y_j . (p_j - p_{j-1})."""
    kinetic = float(np.sum(omega.s * np.sum(omega.p**2, axis=1) / 2.0))
    impulse = float(np.sum(omega.y * (omega.p[1:] - omega.p[:-1])))
    return kinetic + impulse


def signed_impulse(path: Path, j: int, sign: int) -> np.ndarray:
    """q_a: impulse at collision j (1-based), reversed on the minus side."""
    d = path.p[j] - path.p[j - 1]
    return d if sign > 0 else -d


def collision_partition(positions: dict, policy) -> tuple:
    """Connected components of the proximity graph over the given positions.

    `positions` maps collision indices to location vectors.  The policy is
    ("uniform", rho) or ("signed", rho_cross, rho_same); signed indices are
    tuples whose first entry is the sign.
    """
    keys = sorted(positions)
    edges = set()
    for a, b in itertools.combinations(keys, 2):
        dist = float(np.linalg.norm(np.asarray(positions[a]) - np.asarray(positions[b])))
        if policy[0] == "uniform":
            ok = dist <= policy[1]
        elif policy[0] == "signed":
            cross = a[0] != b[0]
            ok = dist <= (policy[1] if cross else policy[2])
        else:
            raise ValueError(f"unknown radius policy {policy!r}")
        if ok:
            edges.add(frozenset({a, b}))
    return connected_components(keys, edges)


@dataclass
class ExtendedPath:
    """Path segments interleaved with phase-space checkpoints (x, p)."""

    segments: list
    checkpoints: list  # 2N pairs (x, p)
    tau: float

    def __post_init__(self):
        if len(self.checkpoints) != 2 * len(self.segments):
            raise ValueError("need two checkpoints per segment")
        for seg in self.segments:
            if abs(seg.t_total - self.tau) > 1e-9 * max(1.0, self.tau):
                raise ValueError("every segment must have duration tau")

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    def collision_indices(self, sign: int = 1) -> list:
        out = []
        for ell, seg in enumerate(self.segments, start=1):
            for j in range(1, seg.k + 1):
                out.append((sign, ell, j))
        return out

    def collision_data(self, sign: int = 1) -> dict:
        """index -> (y, q, p_out, p_in, T) for all collisions."""
        out = {}
        for ell, seg in enumerate(self.segments, start=1):
            times = seg.collision_times(offset=(ell - 1) * self.tau)
            for j in range(1, seg.k + 1):
                out[(sign, ell, j)] = {
                    "y": seg.y[j - 1],
                    "q": signed_impulse(seg, j, sign),
                    "q_local": seg.p[j] - seg.p[j - 1],
                    "p_out": seg.p[j],
                    "p_in": seg.p[j - 1],
                    "T": float(times[j - 1]),
                }
        return out


def single_segment(path: Path, start, end) -> ExtendedPath:
    """Wrap one path as an extended path with its two checkpoints."""
    return ExtendedPath(segments=[path], checkpoints=[start, end], tau=path.t_total)


def concatenate(gamma: ExtendedPath):
    """Concatenated path (S, P, Y) plus compatibility residuals.

    S_a = T_{a+1} - T_a between consecutive collisions; the residual report
    lists |Y_{a+1} - (Y_a + S_a P_a)| together with the reference bound
    C α (r + S_a² τ^{-1} r^{-1} + S_a τ^{-1} r) evaluated at C = 1.
    """
    data = gamma.collision_data()
    keys = gamma.collision_indices()
    if not keys:
        return np.empty(0), np.empty((0, 2)), np.empty((0, 2)), []
    T = np.array([data[a]["T"] for a in keys])
    Y = np.array([data[a]["y"] for a in keys])
    P = np.array([data[a]["p_out"] for a in keys])
    S = np.diff(np.concatenate([T, [gamma.n_segments * gamma.tau]]))
    residuals = []
    for i in range(len(keys) - 1):
        resid = float(np.linalg.norm(Y[i + 1] - (Y[i] + S[i] * P[i])))
        residuals.append({"pair": (keys[i], keys[i + 1]), "residual": resid, "S": float(S[i])})
    return S, P, Y, residuals


def concatenation_bound(S_a: float, params: PathParams, tau: float, C: float = 1.0) -> float:
    return C * params.alpha * (params.r + S_a**2 / (tau * params.r) + S_a * params.r / tau)


@dataclass
class EventReport:
    immediate: list = field(default_factory=list)
    recollisions: list = field(default_factory=list)
    tubes: list = field(default_factory=list)
    tube_incidences: list = field(default_factory=list)
    cones: list = field(default_factory=list)
    cluster_edges: list = field(default_factory=list)
    proximity_edges: list = field(default_factory=list)
    atypical: set = field(default_factory=set)
    typical: set = field(default_factory=set)
    partition: tuple = ()
    time_consistent: bool = True


def _cone_search(ya, qa, yb, qb, p_ref, p_out_a, params: PathParams, dim: int):
    """Exhaustive grid search for an energy-admissible connecting momentum."""
    speed = float(np.linalg.norm(p_ref))
    if speed == 0:
        return False
    kin = params.cone_kinetic_slack
    e_ref = speed**2 / 2.0
    radii = speed + np.linspace(-kin / max(speed, 1e-9), kin / max(speed, 1e-9), params.cone_n_radii)
    radii = radii[radii > 0]
    if dim == 2:
        th = 2.0 * np.pi * np.arange(params.cone_n_angles) / params.cone_n_angles
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    elif dim == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        raise ValueError("cone search supports d in {1,2}")
    disp = yb - ya
    for rho in radii:
        vs = rho * dirs
        if abs(rho**2 / 2.0 - e_ref) > kin:
            continue
        w1 = np.abs(np.sum((vs - qa) ** 2, axis=1) / 2.0 - e_ref) <= kin
        w2 = np.abs(np.sum((vs + qb) ** 2, axis=1) / 2.0 - e_ref) <= kin
        excl = np.linalg.norm(vs - p_out_a, axis=1) >= params.cone_exclusion
        cand = w1 & w2 & excl
        if not np.any(cand):
            continue
        vsel = vs[cand]
        t_opt = vsel @ disp / rho**2
        resid = np.linalg.norm(disp[None, :] - t_opt[:, None] * vsel, axis=1)
        if np.any(resid <= params.cone_pos_slack):
            return True
    return False


def detect_events(gammas: dict, params: PathParams) -> EventReport:
    """Full event detection for a doubled path {+1: Gamma, -1: Gamma}.

    Tube events are the local form (no immediate collisions at the pair, any
    alignment time); tube_incidences additionally require an intervening
    immediate recollision, matching the alternative definition.
    """
    report = EventReport()
    data = {}
    for sign, g in gammas.items():
        data.update(g.collision_data(sign))
    keys = sorted(data, key=lambda a: (-a[0], a[1], a[2]))
    positions = {a: data[a]["y"] for a in keys}

    # immediate recollisions: same-sign adjacent, close, momentum restored
    per_sign = {s: [a for a in keys if a[0] == s] for s in gammas}
    imm_members = set()
    for s, lst in per_sign.items():
        for i in range(len(lst) - 1):
            a, b = lst[i], lst[i + 1]
            if a[1] != b[1]:
                continue  # immediate pairs live inside one segment
            close = np.linalg.norm(data[a]["y"] - data[b]["y"]) <= params.recollision_radius
            restored = (
                np.linalg.norm(data[b]["p_out"] - data[a]["p_in"])
                <= params.immediate_momentum_factor * params.alpha / params.r
            )
            if close and restored:
                report.immediate.append((a, b))
                imm_members |= {a, b}

    # recollisions: same-sign, non-adjacent, close
    for s, lst in per_sign.items():
        for i, a in enumerate(lst):
            for b in lst[i + 2 :]:
                if np.linalg.norm(data[a]["y"] - data[b]["y"]) <= params.recollision_radius:
                    report.recollisions.append((a, b))

    # tube events and tube incidences
    for s, lst in per_sign.items():
        for i, a in enumerate(lst):
            for jdx in range(i + 1, len(lst)):
                b = lst[jdx]
                if a in imm_members or b in imm_members:
                    tube_ok = False
                else:
                    disp = data[b]["y"] - data[a]["y"]
                    pin = data[a]["p_in"]
                    nrm2 = float(np.dot(pin, pin))
                    if nrm2 == 0:
                        tube_ok = False
                    else:
                        t_opt = float(np.dot(pin, disp)) / nrm2
                        tube_ok = float(np.linalg.norm(disp - t_opt * pin)) <= params.tube_radius
                if tube_ok:
                    report.tubes.append((a, b))
                between = lst[i + 1 : jdx]
                if any(c in imm_members for c in between):
                    disp = data[b]["y"] - data[a]["y"]
                    pout = data[a]["p_out"]
                    nrm2 = float(np.dot(pout, pout))
                    if nrm2 > 0:
                        t_opt = float(np.dot(pout, disp)) / nrm2
                        if float(np.linalg.norm(disp - t_opt * pout)) <= params.tube_radius:
                            report.tube_incidences.append((a, b))

    # cone events (path-local impulses: the rerouted trajectory is the
    # particle's own, so the minus side is not time-reversed here)
    p_ref = gammas[1].segments[0].p[0]
    for s, lst in per_sign.items():
        for i, a in enumerate(lst):
            for b in lst[i + 1 :]:
                if _cone_search(
                    data[a]["y"],
                    data[a]["q_local"],
                    data[b]["y"],
                    data[b]["q_local"],
                    p_ref,
                    data[a]["p_out"],
                    params,
                    dim=len(data[a]["y"]),
                ):
                    report.cones.append((a, b))

    # proximity graph (signed radii), cluster graph, partition
    cross, same = params.cluster_cross_factor * params.r, params.cluster_same_factor * params.r
    G = set()
    for a, b in itertools.combinations(keys, 2):
        dist = np.linalg.norm(data[a]["y"] - data[b]["y"])
        thresh = cross if a[0] != b[0] else same
        if dist <= thresh:
            G.add(frozenset({a, b}))
    report.proximity_edges = sorted(map(sorted, G))
    adjacency = {a: set() for a in keys}
    for e in G:
        a, b = tuple(e)
        adjacency[a].add(b)
        adjacency[b].add(a)
    cluster = {e for e in G if any(adjacency[v] - set(e) for v in e)}
    report.cluster_edges = sorted(map(sorted, cluster))
    report.partition = collision_partition(positions, ("signed", cross, same))

    event_members = set(imm_members)
    event_members |= set(itertools.chain.from_iterable(report.recollisions))
    event_members |= set(itertools.chain.from_iterable(report.tubes))
    event_members |= set(itertools.chain.from_iterable(report.cones))
    event_members |= set(itertools.chain.from_iterable(cluster))
    event_members -= imm_members
    cell_of = {}
    for cell in report.partition:
        for a in cell:
            cell_of[a] = cell
    report.atypical = {a for a in keys if any(b in event_members for b in cell_of[a])}
    report.typical = set(keys) - report.atypical

    # time-consistency diagnostic: coincident sites must share collision times
    tol = params.r
    consistent = True
    for a, b in itertools.combinations(keys, 2):
        if np.linalg.norm(data[a]["y"] - data[b]["y"]) <= 0.1 * params.r:
            if abs(data[a]["T"] - data[b]["T"]) > tol:
                consistent = False
    report.time_consistent = consistent
    return report


def skeleton_of(report: EventReport) -> Skeleton:
    """Minimal spanning forests of the five event graphs."""

    def forest(edge_list):
        edges = {frozenset(e) for e in edge_list}
        verts = sorted(set(itertools.chain.from_iterable(edges)))
        if not edges:
            return frozenset()
        w = default_weights(verts, edges)
        f, _, _ = min_spanning_forest(verts, edges, w)
        return frozenset(f)

    atyp_edges = [e for e in report.proximity_edges if any(v in report.atypical for v in e)]
    return Skeleton(
        rec=forest(report.recollisions),
        tube=forest(report.tubes),
        cone=forest(report.cones),
        cluster=forest(report.cluster_edges),
        atypical=forest(atyp_edges),
    )


def maximal_typical_intervals(gammas: dict, report: EventReport) -> list:
    """Disjoint intervals per sign covering exactly the typical indices."""
    out = []
    for sign, g in gammas.items():
        keys = g.collision_indices(sign)
        bad = [a for a in keys if a in report.atypical]
        bounds = [None] + bad + [None]
        for i in range(len(bounds) - 1):
            lo, hi = bounds[i], bounds[i + 1]
            members = [
                a
                for a in keys
                if (lo is None or a > lo) and (hi is None or a < hi)
            ]
            out.append({"sign": sign, "lo": lo, "hi": hi, "members": members})
    return out


@dataclass
class CompletenessVerdict:
    complete: bool
    cell_slack: list


def beta_complete(X: dict, P, beta: float, r: float) -> CompletenessVerdict:
    """Per-cell momentum-transfer cancellation |sum q| <= beta |S| / r."""
    slack = []
    ok = True
    for cell in P:
        total = np.sum([X[a] for a in cell], axis=0)
        lim = beta * len(cell) / r
        val = float(np.linalg.norm(total))
        slack.append({"cell": tuple(cell), "sum_q": val, "limit": lim})
        if val > lim:
            ok = False
    return CompletenessVerdict(complete=ok, cell_slack=slack)


@dataclass
class LadderVerdict:
    is_generalized_ladder: bool
    hypothesis_failed: str | None
    partition: tuple
    detail: str = ""


def verify_generalized_ladder(gammas: dict, params: PathParams) -> LadderVerdict:
    """Check the hypotheses of the ladder-structure lemma and, when they
    hold, assert that the collision partition is a generalized ladder.

    Hypotheses: the doubled path is beta-complete, the endpoints are
    d_r-close, neither path has a recollision or tube incidence, and the
    partition is a perfect matching.  The verdict reports the first failed
    hypothesis otherwise.
    """
    report = detect_events(gammas, params)
    data = {}
    for sign, g in gammas.items():
        data.update(g.collision_data(sign))
    P = report.partition
    qmap = {a: data[a]["q"] for a in data}
    comp = beta_complete(qmap, P, params.beta, params.r)
    if not comp.complete:
        return LadderVerdict(False, "beta_complete", P)
    x0p, p0p = gammas[1].checkpoints[0]
    x0m, p0m = gammas[-1].checkpoints[0]
    d_start = np.linalg.norm(np.asarray(x0p) - np.asarray(x0m)) / params.r + params.r * np.linalg.norm(
        np.asarray(p0p) - np.asarray(p0m)
    )
    if d_start > params.beta:
        return LadderVerdict(False, "endpoints", P)
    if report.recollisions or report.tubes or report.tube_incidences:
        return LadderVerdict(False, "incidence", P)
    if any(len(c) != 2 for c in P):
        return LadderVerdict(False, "matching", P)
    A = gammas[1].collision_indices(1)
    B = gammas[-1].collision_indices(-1)
    ok, detail = is_renormalized_ladder(P, A, B, orientation="ladder")
    return LadderVerdict(bool(ok), None, P, detail=str(detail))


def p_expectation(gammas: dict, P, a_kernel_value: complex, corr, bump, grid, env=None) -> complex:
    """Pointwise integrand of the ladder superoperator.

    Product of the endpoint wavepacket overlaps, the phase e^{i(φ+ - φ-)},
    ε^{k+ + k-} with ε = 1/r (the coupling matching the wavepacket scale of
    `env`), and the Wick cell moments of the partition P.  The overlaps are
    <ξ1|p_k><p_0|ξ0> per side, conjugated on the minus side.
    """
    from .wavepacket import Envelope, PhasePoint, make_wavepacket

    env = env or Envelope(r=bump.r)
    eps = 1.0 / env.r

    def momentum_coeff(xi, p):
        phi = make_wavepacket(PhasePoint(xi[0], xi[1]), env, grid)
        pw = np.exp(sum(1j * p[i] * grid.x_mesh()[i] for i in range(grid.dim)))
        return complex(grid.inner(phi, pw))  # <p|xi> = conj part handled by caller

    overlaps = 1.0 + 0.0j
    phase = 0.0
    total_k = 0
    for sign, g in gammas.items():
        seg = g.segments[0]
        xi0, xi1 = g.checkpoints[0], g.checkpoints[1]
        c_in = momentum_coeff(xi0, seg.p[0])  # <p_0 | xi_0>
        c_out = np.conj(momentum_coeff(xi1, seg.p[-1]))  # <xi_1 | p_k>
        ov = c_out * c_in
        overlaps *= ov if sign > 0 else np.conj(ov)
        phase += sign * path_phase(seg)
        total_k += seg.k
    data = {}
    for sign, g in gammas.items():
        data.update(g.collision_data(sign))
    keys = sorted(data, key=lambda a: (-a[0], a[1], a[2]))
    index_of = {a: i for i, a in enumerate(keys)}
    X = [(data[a]["y"], data[a]["q"]) for a in keys]
    cells = [{index_of[a] for a in cell} for cell in P]
    wick = partition_moment(cells, X, corr, bump)
    return overlaps * np.exp(1j * phase) * (eps**total_k) * wick


def _rot2(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def sample_ladder_pair(rng, params: PathParams, tau: float, k_max: int = 4, with_immediates: bool = True):
    """Draw one candidate mirrored path pair for the ladder campaign (d=2).

    The plus path scatters at well-separated sites with deflection angles
    bounded away from 0 and π; the minus path copies it with jitter within
    the proximity radius, and each side may insert an exactly
    momentum-restoring immediate-recollision pair in the interior of a
    flight stretch.  The construction targets (but does not guarantee) the
    lemma hypotheses; callers must reject candidates that fail them.
    """
    r, a = params.r, params.alpha
    k = int(rng.integers(1, k_max + 1))
    speed = 1.0
    p0 = speed * np.array([np.cos(rng.uniform(0, 2 * np.pi)), np.sin(rng.uniform(0, 2 * np.pi))])
    durations = rng.dirichlet(np.ones(k + 1) * 3.0) * tau
    min_leg = 8.0 * r / speed
    durations = np.maximum(durations, min_leg)
    durations *= tau / durations.sum()
    ps = [p0]
    for _ in range(k):
        theta = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.6)
        ps.append(_rot2(theta) @ ps[-1])
    ys = []
    x = np.zeros(2)
    for j in range(k):
        x = x + durations[j] * ps[j]
        ys.append(x.copy())

    def jitter(scale):
        v = rng.standard_normal(2)
        return scale * rng.uniform(0, 1) * v / max(np.linalg.norm(v), 1e-12)

    def build_side(sign):
        s_side = durations.copy()
        p_side = [q.copy() for q in ps]
        y_side = [y.copy() for y in ys]
        if sign < 0:
            y_side = [y + jitter(0.3 * r) for y in y_side]
            p_side = [q + jitter(0.2 * params.beta / (2 * r)) for q in p_side]
        if with_immediates and rng.random() < 0.6 and k >= 1:
            slot = int(rng.integers(0, k + 1))
            if s_side[slot] * speed > 20.0 * r:
                lead = rng.uniform(6.0 * r / speed, s_side[slot] / 2.0)
                gap = rng.uniform(0.1, 0.5) * a * r / speed
                rest = s_side[slot] - lead - gap
                if rest * speed > 6.0 * r:
                    base = (y_side[slot - 1] if slot > 0 else np.zeros(2)) + lead * p_side[slot]
                    p_mid = _rot2(rng.uniform(0.5, 2.6)) @ p_side[slot]
                    y1 = base
                    y2 = base + gap * p_mid
                    s_side = np.concatenate([s_side[:slot], [lead, gap, rest], s_side[slot + 1 :]])
                    p_side = p_side[: slot + 1] + [p_mid, p_side[slot]] + p_side[slot + 1 :]
                    y_side = y_side[:slot] + [y1, y2] + y_side[slot:]
        path = Path(s=s_side, p=np.array(p_side), y=np.array(y_side).reshape(len(s_side) - 1, -1), t_total=float(np.sum(s_side)))
        end_x = (y_side[-1] if y_side else np.zeros(2)) + s_side[-1] * p_side[-1]
        return single_segment(path, (np.zeros(2), p_side[0]), (end_x, p_side[-1]))

    return {1: build_side(1), -1: build_side(-1)}


def ladder_campaign(n_pairs: int, seed: int, params: PathParams, tau: float = 60.0, k_max: int = 4, max_attempts: int = 100_000):
    """Rejection-sample hypothesis-satisfying pairs and verify each one.

    Returns acceptance statistics and any counterexample fixtures (pairs
    satisfying the hypotheses whose partition is not a generalized ladder).
    """
    rng = np.random.default_rng(seed)
    accepted = 0
    attempts = 0
    counterexamples = []
    while accepted < n_pairs and attempts < max_attempts:
        attempts += 1
        gammas = sample_ladder_pair(rng, params, tau, k_max)
        verdict = verify_generalized_ladder(gammas, params)
        if verdict.hypothesis_failed is not None:
            continue
        accepted += 1
        if not verdict.is_generalized_ladder:
            counterexamples.append(
                {
                    "partition": verdict.partition,
                    "detail": verdict.detail,
                    "plus": _path_fixture(gammas[1]),
                    "minus": _path_fixture(gammas[-1]),
                }
            )
    return {
        "requested": n_pairs,
        "accepted": accepted,
        "attempts": attempts,
        "acceptance_rate": accepted / max(attempts, 1),
        "counterexamples": counterexamples,
    }


def _path_fixture(gamma: ExtendedPath) -> dict:
    seg = gamma.segments[0]
    return {
        "s": seg.s.tolist(),
        "p": seg.p.tolist(),
        "y": seg.y.tolist(),
        "t_total": seg.t_total,
    }


@dataclass
class PathEnsemble:
    paths: list
    rate_recollision: float
    rate_tube: float
    rate_cone: float
    mean_collisions: float
    stderr_collisions: float
    content_hash: str


def sample_paths_mc(t: float, epsilon: float, kernel, n: int, seed: int, params: PathParams | None = None) -> PathEnsemble:
    """Velocity-jump path ensemble with geometric event statistics.

    Collision counts are Poisson(ε² K t), waiting times exponential, and
    deflections follow the collision kernel rows; events are detected with
    the thresholds in `params` (defaults scale with r = 1/ε).
    """
    import hashlib

    if n < 100:
        raise ValueError("need at least 100 sampled paths")
    if params is None:
        params = PathParams(alpha=1.0, r=1.0 / epsilon, tube_radius_factor=0.5)
    mesh = kernel.mesh
    nodes = mesh.nodes(0)
    A = kernel.gain[0]
    K = kernel.K[0]
    rng = np.random.default_rng(seed)
    paths, counts = [], []
    n_rec = n_tube = n_cone = 0
    hasher = hashlib.sha256()
    for _ in range(n):
        i = int(rng.integers(0, len(nodes)))
        t_now, x = 0.0, np.zeros(mesh.dim)
        ss, ps, ys = [], [nodes[i]], []
        while True:
            rate = epsilon**2 * K[i]
            wait = float(rng.exponential(1.0 / rate)) if rate > 0 else np.inf
            if t_now + wait >= t:
                ss.append(t - t_now)
                break
            ss.append(wait)
            x = x + wait * nodes[i]
            ys.append(x.copy())
            i = int(rng.choice(len(nodes), p=A[i] / K[i]))
            ps.append(nodes[i])
            t_now += wait
        y_arr = np.array(ys).reshape(len(ss) - 1, -1) if len(ss) > 1 else np.zeros((0, mesh.dim))
        path = Path(s=np.array(ss), p=np.array(ps), y=y_arr, t_total=t)
        paths.append(path)
        counts.append(path.k)
        hasher.update(np.array(ss).tobytes())
        gam = single_segment(path, (np.zeros(mesh.dim), path.p[0]), (x, path.p[-1]))
        rep = detect_events({1: gam, -1: gam}, params)
        plus_rec = [e for e in rep.recollisions if e[0][0] == 1]
        plus_tube = [e for e in rep.tubes if e[0][0] == 1]
        plus_cone = [e for e in rep.cones if e[0][0] == 1]
        n_rec += bool(plus_rec)
        n_tube += bool(plus_tube)
        n_cone += bool(plus_cone)
    counts = np.array(counts, dtype=float)
    return PathEnsemble(
        paths=paths,
        rate_recollision=n_rec / n,
        rate_tube=n_tube / n,
        rate_cone=n_cone / n,
        mean_collisions=float(counts.mean()),
        stderr_collisions=float(counts.std(ddof=1) / np.sqrt(n)),
        content_hash=hasher.hexdigest(),
    )
