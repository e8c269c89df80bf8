"""Exact finite combinatorics: ladders, colorings, forests, and partitions.

Everything here is small-scale and exhaustively verifiable: set partitions
of collision indices, (anti-)ladder matchings and their renormalized forms,
canonical colorings that reconstruct partitions, minimal spanning forests
with the dominated/connected edge sets, and the inclusion-exclusion
identities they satisfy.

Collision indices in the doubled setting are tuples (sign, segment, slot)
with sign in {+1, -1}; indices of opposite sign are incomparable, and within
one sign the order is lexicographic in (segment, slot).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

IMREC = "imrec"

# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------


def canon(partition) -> tuple:
    """Canonical hashable form: cells sorted internally and by minimum."""
    cells = [tuple(sorted(c)) for c in partition if len(c) > 0]
    return tuple(sorted(cells))


def all_partitions(items):
    """All set partitions of a list (Bell-number many)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in all_partitions(rest):
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1 :]
        yield [[first]] + sub


def restrict(partition, subset) -> tuple:
    sub = set(subset)
    return canon([set(c) & sub for c in partition if set(c) & sub])


def is_refinement(finer, coarser) -> bool:
    """True if every cell of `finer` lies inside a cell of `coarser`."""
    lookup = {}
    for cell in coarser:
        for x in cell:
            lookup[x] = id(cell)
    for cell in finer:
        ids = {lookup.get(x) for x in cell}
        if len(ids) != 1 or None in ids:
            return False
    return True


def connected_components(vertices, edges):
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in edges:
        a, b = tuple(e)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comps = {}
    for v in vertices:
        comps.setdefault(find(v), set()).add(v)
    return canon(comps.values())


# ---------------------------------------------------------------------------
# ladders, anti-ladders, renormalized forms
# ---------------------------------------------------------------------------


def ladder_partition(A, B, orientation="ladder") -> tuple:
    """Perfect matching by the order-preserving (or order-reversing) bijection."""
    A, B = list(A), list(B)
    if len(A) != len(B):
        raise ValueError("ladder matching requires |A| = |B|")
    if orientation == "ladder":
        pairs = zip(A, B)
    elif orientation == "antiladder":
        pairs = zip(A, reversed(B))
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    return canon([{a, b} for a, b in pairs])


def simple_partition(A):
    """The unique perfect matching of consecutive elements, or None if |A| odd."""
    A = list(A)
    if len(A) % 2 != 0:
        return None
    return canon([{A[i], A[i + 1]} for i in range(0, len(A), 2)])


def is_renormalized_ladder(P, A, B, orientation="ladder"):
    """Check the renormalized (anti-)ladder conditions; return (ok, witness).

    On success the witness is (I_A, I_B), the same-side immediate-pair index
    sets; on failure it is the name of the violated clause.
    """
    A, B = list(A), list(B)
    posA = {a: i for i, a in enumerate(A)}
    posB = {b: i for i, b in enumerate(B)}
    ground = set(A) | set(B)
    cells = [set(c) for c in P]
    covered = set().union(*cells) if cells else set()
    if covered != ground:
        return False, "ground set"
    if any(len(c) != 2 for c in cells):
        return False, "matching"
    I_A, I_B, rungs = set(), set(), []
    for c in cells:
        x, y = sorted(c, key=lambda e: (e not in posA, posA.get(e, posB.get(e))))
        if x in posA and y in posA:
            if abs(posA[x] - posA[y]) != 1:
                return False, "adjacency"
            I_A |= {x, y}
        elif x in posB and y in posB:
            if abs(posB[x] - posB[y]) != 1:
                return False, "adjacency"
            I_B |= {x, y}
        else:
            a, b = (x, y) if x in posA else (y, x)
            rungs.append((a, b))
    restA = [a for a in A if a not in I_A]
    restB = [b for b in B if b not in I_B]
    if len(restA) != len(restB):
        return False, "rung count"
    want = ladder_partition(restA, restB, orientation)
    if canon([{a, b} for a, b in rungs]) != want:
        return False, orientation
    return True, (frozenset(I_A), frozenset(I_B))


def _sides(kplus: int, kminus: int):
    A = [(1, 1, j) for j in range(1, kplus + 1)]
    B = [(-1, 1, j) for j in range(1, kminus + 1)]
    return A, B


def is_generalized_ladder(P, kplus: int, kminus: int) -> bool:
    """Generalized ladder on [kplus] ⊔ [kminus]: adjacent same-side immediate
    pairs plus an order-preserving ladder on the remaining indices."""
    A, B = _sides(kplus, kminus)
    ok, _ = is_renormalized_ladder(P, A, B, orientation="ladder")
    return ok


def enumerate_generalized_ladders(kplus: int, kminus: int):
    """All generalized ladder partitions, by direct construction."""
    if kplus + kminus > 12:
        raise ValueError("size cap exceeded (kplus + kminus <= 12)")
    A, B = _sides(kplus, kminus)
    out = set()
    for pairsA in _adjacent_pairings(A):
        usedA = set(itertools.chain.from_iterable(pairsA))
        for pairsB in _adjacent_pairings(B):
            usedB = set(itertools.chain.from_iterable(pairsB))
            restA = [a for a in A if a not in usedA]
            restB = [b for b in B if b not in usedB]
            if len(restA) != len(restB):
                continue
            cells = [set(p) for p in pairsA + pairsB]
            cells += [set(c) for c in ladder_partition(restA, restB)]
            out.add(canon(cells))
    return sorted(out)


def _adjacent_pairings(A):
    """All collections of disjoint pairs of consecutive elements of A."""
    A = list(A)

    def rec(i):
        if i >= len(A):
            yield []
            return
        for tail in rec(i + 1):
            yield tail
        if i + 1 < len(A):
            for tail in rec(i + 2):
                yield [(A[i], A[i + 1])] + tail

    return rec(0)


# ---------------------------------------------------------------------------
# colorings
# ---------------------------------------------------------------------------


def valid_coloring(psi: dict, order, segment_of=None) -> bool:
    """Imrec-colored indices must pair up consecutively, within one segment."""
    order = list(order)
    pending = None
    for a in order:
        if psi[a] == IMREC:
            if pending is None:
                pending = a
            else:
                if segment_of is not None and segment_of(pending) != segment_of(a):
                    return False
                pending = None
        else:
            if pending is not None:
                return False
    return pending is None


def imrec_pairs(psi: dict, order):
    """The unique decomposition of the imrec set into consecutive pairs."""
    pairs, pending = [], None
    for a in order:
        if psi[a] == IMREC:
            if pending is None:
                pending = a
            else:
                pairs.append((pending, a))
                pending = None
    return pairs


def canonical_coloring(P, A, B) -> dict:
    """Canonical coloring of a renormalized (anti-)ladder: rung colors in the
    order of the A-side elements, imrec on immediate pairs."""
    for orientation in ("ladder", "antiladder"):
        ok, witness = is_renormalized_ladder(P, A, B, orientation)
        if ok:
            break
    else:
        raise ValueError("P is not a renormalized (anti-)ladder")
    I_A, I_B = witness
    posA = {a: i for i, a in enumerate(A)}
    rungs = sorted(
        (tuple(c) for c in P if not set(c) <= I_A and not set(c) <= I_B),
        key=lambda c: min(posA[e] for e in c if e in posA),
    )
    psi = {}
    for n, cell in enumerate(rungs, start=1):
        for x in cell:
            psi[x] = ("ext", n)
    for x in I_A | I_B:
        psi[x] = IMREC
    return psi


def coloring_to_partition(psi_plus: dict, order_plus, psi_minus: dict, order_minus, segment_of=None):
    """Partition from a pair of colorings; returns (partition, has_singleton)."""
    if not valid_coloring(psi_plus, order_plus, segment_of):
        raise ValueError("invalid + coloring")
    if not valid_coloring(psi_minus, order_minus, segment_of):
        raise ValueError("invalid - coloring")
    cells = {}
    for psi, order in ((psi_plus, order_plus), (psi_minus, order_minus)):
        for a in order:
            if psi[a] != IMREC:
                cells.setdefault(psi[a], set()).add(a)
    out = [c for c in cells.values()]
    for psi, order in ((psi_plus, order_plus), (psi_minus, order_minus)):
        out += [set(p) for p in imrec_pairs(psi, order)]
    has_singleton = any(len(c) == 1 for c in out)
    return canon(out), has_singleton


# ---------------------------------------------------------------------------
# weighted graphs and minimal spanning forests
# ---------------------------------------------------------------------------


@dataclass
class WeightedGraph:
    vertices: list
    edges: set
    weights: dict = field(default_factory=dict)

    def __post_init__(self):
        self.edges = {frozenset(e) for e in self.edges}
        if not self.weights:
            self.weights = default_weights(self.vertices, all_edges(self.vertices))
        vals = [self.weights[e] for e in self.edges]
        if len(set(vals)) != len(vals):
            raise ValueError("edge weights must be pairwise distinct")


def all_edges(vertices):
    return {frozenset(e) for e in itertools.combinations(vertices, 2)}


def default_weights(vertices, edges) -> dict:
    """Deterministic injective weights by lexicographic edge rank; edges
    joining indices of opposite sign (doubled indices) are weighted above all
    same-sign edges."""

    def sign_of(v):
        return v[0] if isinstance(v, tuple) and v and v[0] in (1, -1) else 0

    def key(e):
        a, b = sorted(e)
        cross = sign_of(a) != sign_of(b)
        return (cross, a, b)

    return {e: float(i + 1) for i, e in enumerate(sorted(edges, key=key))}


def min_spanning_forest(vertices, edges, weights=None):
    """Kruskal minimal spanning forest plus dominated and connected edge sets.

    Returns (forest, dominated, connected) where `dominated` is the set of
    non-forest edges whose endpoints are joined by a strictly lighter forest
    path, and `connected` is every edge with both endpoints in one forest
    component.  (In the partition-of-unity identities the dominated set is
    used together with the forest itself, D = forest ∪ dominated.)
    """
    edges = {frozenset(e) for e in edges}
    if weights is None:
        weights = default_weights(vertices, all_edges(vertices))
    vals = [weights[e] for e in edges]
    if len(set(vals)) != len(vals):
        raise ValueError("edge weights must be pairwise distinct")
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    forest = set()
    for e in sorted(edges, key=lambda e: weights[e]):
        a, b = tuple(e)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            forest.add(e)
    comp = {v: find(v) for v in vertices}
    connected = {e for e in edges if comp[tuple(e)[0]] == comp[tuple(e)[1]]}
    dominated = set()
    for e in connected - forest:
        lighter = {f for f in forest if weights[f] < weights[e]}
        a, b = tuple(e)
        if _connected_in(lighter, a, b):
            dominated.add(e)
    return forest, dominated, connected


def _connected_in(edges, a, b) -> bool:
    adj = {}
    for e in edges:
        u, v = tuple(e)
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    stack, seen = [a], {a}
    while stack:
        u = stack.pop()
        if u == b:
            return True
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return False


def msf_of_graph(vertices, graph_edges, weights):
    forest, _, _ = min_spanning_forest(vertices, graph_edges, weights)
    return frozenset(forest)


def modified_weights(weights, base_forest, vertices) -> dict:
    """Add the maximal weight to every edge joining distinct components of
    the base forest, preserving relative order within each class."""
    comps = {}
    for i, cell in enumerate(connected_components(vertices, base_forest)):
        for v in cell:
            comps[v] = i
    top = max(weights.values()) if weights else 0.0
    out = {}
    for e, w in weights.items():
        a, b = tuple(e)
        out[e] = w + (top if comps.get(a) != comps.get(b) else 0.0)
    return out


def is_acyclic(vertices, edges) -> bool:
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in edges:
        a, b = tuple(e)
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[ra] = rb
    return True


def forests_on(vertices, edges=None):
    """All acyclic edge subsets (spanning forests) over the given edge pool."""
    pool = sorted(edges if edges is not None else all_edges(vertices), key=sorted)
    out = [frozenset()]
    for e in pool:
        new = []
        for f in out:
            if is_acyclic(vertices, f | {e}):
                new.append(f | {e})
        out += new
    return out


def verify_forest_identities(n: int, trials: int = 50, distribution: str = "uniform", seed: int = 0) -> dict:
    """Exhaustively verify the forest partition-of-unity and Mobius identities.

    (i)  For every graph G on [n], sum_F 1(F_G = F) = 1 exactly.
    (ii) sum_F prod_{e in F} Y_e prod_{e not in D(F)} (1 - Y_e) = 1 for random
         real weights Y, where D(F) = F ∪ dominated(F).
    (iii) Per forest F, the inclusion-exclusion refinement over F' ⊇ F with
         base-modified weights reproduces 1(F_G = F), both as exact 0/1
         arithmetic and as the corresponding multilinear polynomial identity.
    """
    if n > 5:
        raise ValueError("exhaustive sweep capped at n <= 5")
    rng = np.random.default_rng(seed)
    vertices = list(range(n))
    pool = sorted(all_edges(vertices), key=sorted)
    weights = default_weights(vertices, pool)
    forests = forests_on(vertices)
    report = {
        "n": n,
        "trials": trials,
        "distribution": distribution,
        "n_graphs": 2 ** len(pool),
        "n_forests": len(forests),
        "max_dev_partition_of_unity": 0.0,
        "max_dev_mobius": 0.0,
        "indicator_failures": [],
        "counterexamples": [],
    }

    graphs = []
    for mask in range(2 ** len(pool)):
        g = frozenset(e for i, e in enumerate(pool) if mask >> i & 1)
        graphs.append(g)

    msf = {g: msf_of_graph(vertices, g, weights) for g in graphs}
    forest_set = set(forests)

    # (i) exact partition of unity over graphs
    for g in graphs:
        hits = sum(1 for f in forests if msf[g] == f)
        if hits != 1 or msf[g] not in forest_set:
            report["indicator_failures"].append(sorted(map(sorted, g)))

    # D(F) = F ∪ dominated(F)
    Dfull = {}
    for f in forests:
        dom_f = set()
        for e in pool:
            if e in f:
                continue
            lighter = {x for x in f if weights[x] < weights[e]}
            a, b = tuple(e)
            if _connected_in(lighter, a, b):
                dom_f.add(e)
        Dfull[f] = set(f) | dom_f

    def draw():
        if distribution == "uniform":
            return rng.uniform(0.0, 1.0, size=len(pool))
        if distribution == "normal":
            return rng.standard_normal(len(pool))
        if distribution == "binary":
            return rng.integers(0, 2, size=len(pool)).astype(float)
        raise ValueError(f"unknown distribution {distribution!r}")

    def b_poly(f, y):
        val = 1.0
        for i, e in enumerate(pool):
            if e in f:
                val *= y[i]
            elif e not in Dfull[f]:
                val *= 1.0 - y[i]
        return val

    # (ii) polynomial partition of unity
    for _ in range(trials):
        y = draw()
        total = sum(b_poly(f, y) for f in forests)
        dev = abs(total - 1.0)
        report["max_dev_partition_of_unity"] = max(report["max_dev_partition_of_unity"], dev)
        if dev > 1e-10:
            report["counterexamples"].append({"identity": "partition_of_unity", "Y": y.tolist()})

    # (iii) Mobius refinement per forest, with base-modified weights
    cube_weight = {}

    def poly_of_indicator(values, y):
        # multilinear extension: sum over graphs of indicator * prod Y/(1-Y)
        total = 0.0
        for g, ind in values.items():
            if ind:
                total += cube_weight[g]
        return total

    for f in forests:
        wf = modified_weights(weights, f, vertices)
        msf_mod = {g: msf_of_graph(vertices, g, wf) for g in graphs}
        supersets = [fp for fp in forests if f <= fp]
        # exact indicator identity on every graph
        for g in graphs:
            lhs = 1 if msf[g] == f else 0
            rhs = sum((-1) ** len(fp - f) * (1 if fp <= msf_mod[g] else 0) for fp in supersets)
            if lhs != rhs:
                report["indicator_failures"].append(
                    {"identity": "mobius", "forest": sorted(map(sorted, f)), "graph": sorted(map(sorted, g))}
                )
        # polynomial counterpart at random real Y
        for _ in range(max(1, trials // 10)):
            y = draw()
            for i, g in enumerate(graphs):
                w = 1.0
                for j, e in enumerate(pool):
                    w *= y[j] if e in g else (1.0 - y[j])
                cube_weight[g] = w
            lhs = b_poly(f, y)
            rhs = 0.0
            for fp in supersets:
                term = poly_of_indicator({g: fp <= msf_mod[g] for g in graphs}, y)
                rhs += (-1) ** len(fp - f) * term
            dev = abs(lhs - rhs)
            report["max_dev_mobius"] = max(report["max_dev_mobius"], dev)
            if dev > 1e-10:
                report["counterexamples"].append(
                    {"identity": "mobius_poly", "forest": sorted(map(sorted, f)), "Y": y.tolist()}
                )

    report["passed"] = not report["indicator_failures"] and not report["counterexamples"]
    return report


# ---------------------------------------------------------------------------
# doubled index sets and skeletons
# ---------------------------------------------------------------------------


def doubled_index_set(kplus, kminus):
    """Collision indices (sign, segment, slot) for per-segment counts."""
    K = []
    for sign, counts in ((1, kplus), (-1, kminus)):
        for seg, k in enumerate(counts, start=1):
            for j in range(1, k + 1):
                K.append((sign, seg, j))
    return K


def side_of(a):
    return a[0]


def segment_of(a):
    return a[1]


def side_sorted(K, sign):
    return sorted(a for a in K if side_of(a) == sign)


LO, HI = ("LO',",), ("HI',",)  # sentinels ordered around all real indices


def abstract_intervals(support, sign):
    """Consecutive gaps of one side of the support, with sentinel endpoints."""
    marks = sorted(a for a in support if side_of(a) == sign)
    bounds = [LO] + marks + [HI]
    return [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]


def realize_interval(interval, K, sign):
    lo, hi = interval
    out = []
    for a in side_sorted(K, sign):
        if (lo == LO or a > lo) and (hi == HI or a < hi):
            out.append(a)
    return out


@dataclass(frozen=True)
class Skeleton:
    """Tuple of five forests over doubled collision indices."""

    rec: frozenset = frozenset()
    tube: frozenset = frozenset()
    cone: frozenset = frozenset()
    cluster: frozenset = frozenset()
    atypical: frozenset = frozenset()

    def __post_init__(self):
        for name in ("rec", "tube", "cone", "cluster", "atypical"):
            edges = {frozenset(e) for e in getattr(self, name)}
            object.__setattr__(self, name, frozenset(edges))
            verts = set(itertools.chain.from_iterable(edges))
            if not is_acyclic(verts, edges):
                raise ValueError(f"{name} component of the skeleton must be acyclic")

    @property
    def support(self) -> frozenset:
        return frozenset(itertools.chain.from_iterable(self.rec | self.tube | self.cone | self.cluster | self.atypical))

    @property
    def complexity(self) -> int:
        return len(self.rec) + len(self.tube) + len(self.cone) + len(self.cluster) + len(self.atypical)

    def pinned_partition(self) -> tuple:
        """P_F: components of the proximity forests (rec, cluster, atypical)
        on the support; tube/cone-only members appear as singletons."""
        return connected_components(sorted(self.support), self.rec | self.cluster | self.atypical)


def _valid_simple_cells(elements):
    """Adjacent perfect matching with segment-internal pairs, or None."""
    if len(elements) % 2 != 0:
        return None
    cells = []
    for i in range(0, len(elements), 2):
        a, b = elements[i], elements[i + 1]
        if segment_of(a) != segment_of(b):
            return None
        cells.append({a, b})
    return cells


def canonical_partitions(skel: Skeleton, K, cap: int = 12) -> set:
    """Q_F by brute-force filter over all partitions of K (exhaustive)."""
    K = sorted(K)
    if len(K) > cap:
        raise ValueError("canonical_partitions capped for exhaustive enumeration")
    if not set(skel.support) <= set(K):
        raise ValueError("K must contain the skeleton support")
    ctx = _CanonicalContext(skel, K)
    out = set()
    for P in all_partitions(K):
        Pc = canon(P)
        if ctx.contains(Pc):
            out.add(Pc)
    return out


class _CanonicalContext:
    """Precomputed interval data for the Q_F membership test."""

    def __init__(self, skel: Skeleton, K):
        self.support = skel.support
        self.pinned = skel.pinned_partition()
        self.intervals = {s: abstract_intervals(self.support, s) for s in (1, -1)}
        self.realized = {
            (s, iv): tuple(realize_interval(iv, K, s)) for s in (1, -1) for iv in self.intervals[s]
        }
        self.locator = {}
        for key, elems in self.realized.items():
            for a in elems:
                self.locator[a] = key
        self.simple_ok = {key: _valid_simple_cells(list(elems)) for key, elems in self.realized.items()}

    def contains(self, P) -> bool:
        support = self.support
        if any(len(c) == 1 for c in P):
            return False
        touching = canon([c for c in P if set(c) & support])
        if touching != self.pinned:
            return False
        # interval-filling immediate pairs must sit inside one segment
        for c in P:
            if len(c) == 2 and not (set(c) & support):
                a, b = c
                if side_of(a) == side_of(b) and segment_of(a) != segment_of(b):
                    return False
        partner = {}
        for c in P:
            if set(c) & support:
                continue
            homes = {self.locator[a] for a in c}
            if len(homes) == 1:
                (home,) = homes
                partner.setdefault(home, set()).add(home)
            elif len(homes) == 2:
                h1, h2 = tuple(homes)
                if h1[0] == h2[0]:
                    return False  # cross-interval cell within one sign
                partner.setdefault(h1, set()).add(h2)
                partner.setdefault(h2, set()).add(h1)
            else:
                return False
        handled = set()
        for home, others in partner.items():
            if home in handled:
                continue
            others = others - {home}
            if not others:
                elems = self.realized[home]
                cells = [set(c) for c in P if set(c) <= set(elems)]
                want = self.simple_ok[home]
                if want is None or canon(cells) != canon(want):
                    return False
                handled.add(home)
            elif len(others) == 1:
                (mate,) = others
                if partner.get(mate, set()) - {mate} not in ({home}, set()):
                    return False
                ea, eb = self.realized[home], self.realized[mate]
                cells = [set(c) for c in P if set(c) <= set(ea) | set(eb)]
                if sum(len(c) for c in cells) != len(ea) + len(eb):
                    return False  # the pair must be saturated
                A, B = (list(ea), list(eb)) if home[0] == 1 else (list(eb), list(ea))
                okl, _ = is_renormalized_ladder(canon(cells), A, B, "ladder")
                oka, _ = is_renormalized_ladder(canon(cells), A, B, "antiladder")
                if not (okl or oka):
                    return False
                handled |= {home, mate}
            else:
                return False
        return True


def _is_adjacent(a, b, K) -> bool:
    side = [x for x in sorted(K) if side_of(x) == side_of(a)]
    try:
        ia, ib = side.index(a), side.index(b)
    except ValueError:
        return False
    return abs(ia - ib) == 1


# ---------------------------------------------------------------------------
# coloring sets of a skeleton
# ---------------------------------------------------------------------------


def _interval_colorings(elements, label, orientations):
    """Colorings of one realized interval: all-imrec, or rungs labelled
    (label, 1..h) in increasing/decreasing order with imrec filler pairs."""
    out = []
    n = len(elements)
    all_im = {a: IMREC for a in elements}
    if _valid_simple_cells(list(elements)) is not None:
        out.append((None, all_im))
    for h in range(1, n + 1):
        for rung_pos in itertools.combinations(range(n), h):
            segments_ok = True
            gaps = []
            prev = -1
            for rp in rung_pos + (n,):
                gaps.append(list(range(prev + 1, rp)))
                prev = rp
            for gap in gaps:
                if _valid_simple_cells([elements[i] for i in gap]) is None:
                    segments_ok = False
                    break
            if not segments_ok:
                continue
            for orient in orientations:
                psi = dict(all_im)
                ranks = range(1, h + 1) if orient == "+" else range(h, 0, -1)
                for pos, rank in zip(rung_pos, ranks):
                    psi[elements[pos]] = ("rung", label, rank)
                out.append((orient, psi))
    return out


def enumerate_coloring_sets(skel: Skeleton, K, sign) -> list:
    """All colorings of one side of K per the skeleton coloring rules.

    A coloring maps each index to its pinned support cell, to a rung color
    ((interval-pair, n) with ranks increasing on the + side and either
    orientation on the - side), or to imrec; imrec indices pair up adjacently
    within segments, and each interval is matched to at most one interval of
    the opposite sign.
    """
    if len(K) > 10:
        raise ValueError("coloring enumeration capped at 10 doubled indices")
    support = skel.support
    pinned = {a: ("cell", cell) for cell in skel.pinned_partition() for a in cell}
    my_ivs = abstract_intervals(support, sign)
    other_ivs = abstract_intervals(support, -sign)
    base = {a: pinned[a] for a in side_sorted(K, sign) if a in support}
    per_interval = []
    for iv in my_ivs:
        elems = realize_interval(iv, K, sign)
        options = []
        # unmatched: all-imrec (only if a valid simple filling exists or empty)
        if _valid_simple_cells(list(elems)) is not None:
            options.append((None, {a: IMREC for a in elems}))
        for mate in other_ivs:
            label = frozenset({(sign, iv), (-sign, mate)})
            orientations = ("+",) if sign == 1 else ("+", "-")
            for orient, psi in _interval_colorings(list(elems), label, orientations):
                if orient is None:
                    continue
                options.append((mate, psi))
        per_interval.append((iv, elems, options))
    out = []
    for combo in itertools.product(*[opts for (_, _, opts) in per_interval]):
        mates = [m for (m, _) in combo if m is not None]
        if len(mates) != len(set(mates)):
            continue  # the interval matching must be injective
        psi = dict(base)
        for _, p in combo:
            psi.update(p)
        out.append(psi)
    return out


def generalized_ladder_direct(P, kplus: int, kminus: int) -> bool:
    """Definition-direct check: read off the immediate index sets from P and
    require the remaining cells to form the order-preserving ladder."""
    A, B = _sides(kplus, kminus)
    cells = [set(c) for c in P]
    covered = set().union(*cells) if cells else set()
    if covered != set(A) | set(B):
        return False
    removed = set()
    for s, k in ((1, kplus), (-1, kminus)):
        for j in range(1, k):
            if {(s, 1, j), (s, 1, j + 1)} in cells:
                removed |= {(s, 1, j), (s, 1, j + 1)}
    restA = [a for a in A if a not in removed]
    restB = [b for b in B if b not in removed]
    rest_cells = canon([c - removed for c in cells if c - removed])
    if len(restA) != len(restB):
        return False
    return rest_cells == ladder_partition(restA, restB, "ladder")


def ladder_definition_disagreements(kmax: int = 4) -> list:
    """Sweep comparing the two ladder formalizations; records any partition
    on which they disagree (expected: none)."""
    out = []
    for kp in range(1, kmax + 1):
        for km in range(1, kmax + 1):
            if kp + km > 8:
                continue
            K = doubled_index_set([kp], [km])
            for P in all_partitions(K):
                Pc = canon(P)
                a = is_generalized_ladder(Pc, kp, km)
                b = generalized_ladder_direct(Pc, kp, km)
                if a != b:
                    out.append({"kplus": kp, "kminus": km, "partition": Pc, "renormalized": a, "direct": b})
    return out


def standard_skeleton_sweep(extended: bool = False) -> list:
    """Named (skeleton, K) cases for the coloring-machine verification sweep.

    Covers the empty skeleton, single recollision pairs, a three-index
    cluster, tube and cone events (with their proximity partners), atypical
    edges, and multi-segment index sets, all on <= 10 doubled indices.
    With extended=True the sweep includes the largest (10-index) cases.
    """

    def idx(sign, seg, j):
        return (sign, seg, j)

    cases = []
    # empty skeletons on assorted index sets
    cases.append(("empty-1+1", Skeleton(), doubled_index_set([1], [1])))
    cases.append(("empty-2+2", Skeleton(), doubled_index_set([2], [2])))
    cases.append(("empty-3+3", Skeleton(), doubled_index_set([3], [3])))
    cases.append(("empty-2+4", Skeleton(), doubled_index_set([2], [4])))
    cases.append(("empty-4+2", Skeleton(), doubled_index_set([4], [2])))
    cases.append(("empty-2seg", Skeleton(), doubled_index_set([1, 1], [1, 1])))
    cases.append(("empty-2seg-uneven", Skeleton(), doubled_index_set([2, 1], [1, 2])))
    # one recollision pair (same sign, non-adjacent)
    rec = frozenset({frozenset({idx(1, 1, 1), idx(1, 1, 3)})})
    cases.append(("rec-pair", Skeleton(rec=rec), doubled_index_set([3], [3])))
    cases.append(("rec-pair-small", Skeleton(rec=rec), doubled_index_set([3], [1])))
    rec_m = frozenset({frozenset({idx(-1, 1, 1), idx(-1, 1, 3)})})
    cases.append(("rec-pair-minus", Skeleton(rec=rec_m), doubled_index_set([2], [4])))
    # a 3-index cluster (one cell of size three)
    clu = frozenset(
        {
            frozenset({idx(1, 1, 1), idx(-1, 1, 1)}),
            frozenset({idx(1, 1, 1), idx(1, 1, 2)}),
        }
    )
    cases.append(("cluster-3", Skeleton(cluster=clu), doubled_index_set([3], [2])))
    cases.append(("cluster-3-wide", Skeleton(cluster=clu), doubled_index_set([3], [3])))
    # cross-sign atypical pair
    atyp = frozenset({frozenset({idx(1, 1, 2), idx(-1, 1, 2)})})
    cases.append(("atypical-cross", Skeleton(atypical=atyp), doubled_index_set([3], [3])))
    cases.append(("atypical-cross-2", Skeleton(atypical=atyp), doubled_index_set([2], [2])))
    # tube event whose endpoints are proximity-partnered by atypical edges
    tube = frozenset({frozenset({idx(1, 1, 1), idx(1, 1, 3)})})
    tube_atyp = frozenset(
        {
            frozenset({idx(1, 1, 1), idx(-1, 1, 1)}),
            frozenset({idx(1, 1, 3), idx(-1, 1, 3)}),
        }
    )
    cases.append(("tube-covered", Skeleton(tube=tube, atypical=tube_atyp), doubled_index_set([3], [3])))
    # cone event, likewise covered
    cone = frozenset({frozenset({idx(1, 1, 1), idx(1, 1, 2)})})
    cone_atyp = frozenset(
        {
            frozenset({idx(1, 1, 1), idx(-1, 1, 2)}),
            frozenset({idx(1, 1, 2), idx(-1, 1, 1)}),
        }
    )
    cases.append(("cone-covered", Skeleton(cone=cone, atypical=cone_atyp), doubled_index_set([3], [3])))
    # bare tube event: endpoints have no proximity partner, so every
    # candidate partition has a pinned singleton and both sides are empty
    cases.append(("tube-bare", Skeleton(tube=tube), doubled_index_set([3], [2])))
    # recollision pair next to a cross atypical edge
    cases.append(
        (
            "rec+atypical",
            Skeleton(rec=rec, atypical=frozenset({frozenset({idx(1, 1, 2), idx(-1, 1, 2)})})),
            doubled_index_set([3], [3]),
        )
    )
    # two recollision pairs, one per sign
    two_rec = frozenset(
        {
            frozenset({idx(1, 1, 1), idx(1, 1, 3)}),
            frozenset({idx(-1, 1, 2), idx(-1, 1, 4)}),
        }
    )
    cases.append(("rec-both-signs", Skeleton(rec=two_rec), doubled_index_set([3], [4])))
    # cluster spanning a segment boundary
    clu_seg = frozenset(
        {
            frozenset({idx(1, 1, 2), idx(1, 2, 1)}),
            frozenset({idx(1, 2, 1), idx(-1, 1, 2)}),
        }
    )
    cases.append(("cluster-2seg", Skeleton(cluster=clu_seg), doubled_index_set([2, 1], [2])))
    # multi-segment empty with odd side (forces cross-interval ladders)
    cases.append(("empty-odd", Skeleton(), doubled_index_set([1], [3])))
    cases.append(("empty-odd-rev", Skeleton(), doubled_index_set([3], [1])))
    # recollision pair in a two-segment plus side
    rec_2seg = frozenset({frozenset({idx(1, 1, 1), idx(1, 2, 1)})})
    cases.append(("rec-2seg", Skeleton(rec=rec_2seg), doubled_index_set([2, 1], [1, 2])))
    cases.append(("atypical-2seg", Skeleton(atypical=frozenset({frozenset({idx(1, 2, 1), idx(-1, 1, 1)})})), doubled_index_set([1, 1], [2])))
    if extended:
        cases.append(("empty-5+5", Skeleton(), doubled_index_set([5], [5])))
        cases.append(("empty-4+4", Skeleton(), doubled_index_set([4], [4])))
        rec44 = frozenset({frozenset({idx(1, 1, 1), idx(1, 1, 4)})})
        cases.append(("rec-4+4", Skeleton(rec=rec44), doubled_index_set([4], [4])))
        cases.append(
            (
                "cluster-parity-empty",
                Skeleton(
                    cluster=frozenset(
                        {
                            frozenset({idx(1, 1, 2), idx(-1, 1, 2)}),
                            frozenset({idx(1, 1, 2), idx(1, 1, 3)}),
                        }
                    )
                ),
                doubled_index_set([5], [5]),
            )
        )
        cases.append(
            (
                "cluster-4cell-5+5",
                Skeleton(
                    cluster=frozenset(
                        {
                            frozenset({idx(1, 1, 2), idx(-1, 1, 2)}),
                            frozenset({idx(1, 1, 2), idx(1, 1, 3)}),
                            frozenset({idx(1, 1, 2), idx(-1, 1, 3)}),
                        }
                    )
                ),
                doubled_index_set([5], [5]),
            )
        )
    return cases


def partitions_from_coloring_sets(skel: Skeleton, K) -> set:
    """Q(Ψ+(F), Ψ-(F)): assemble partitions from all coloring pairs,
    excluding those with singleton cells."""
    plus = enumerate_coloring_sets(skel, K, 1)
    minus = enumerate_coloring_sets(skel, K, -1)
    op, om = side_sorted(K, 1), side_sorted(K, -1)
    out = set()
    for pp in plus:
        for pm in minus:
            P, has_singleton = coloring_to_partition(pp, op, pm, om, segment_of)
            if not has_singleton:
                out.add(P)
    return out
