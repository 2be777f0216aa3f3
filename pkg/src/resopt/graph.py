"""Weighted digraphs, Markov-switched graph processes, and their summaries.

Conventions. ``weights[i, j] > 0`` means information flows from vertex ``j``
to vertex ``i`` (``j`` is an in-neighbour of ``i``).  The Laplacian puts row
sums of the adjacency on the diagonal, so every Laplacian annihilates the
all-ones vector exactly.

Randomness. Switching paths are sampled with numpy's PCG64 bit generator and
inverse-CDF transforms only (``u = gen.random()``; holding times are
``-log1p(-u) / rate``; discrete draws walk the CDF).  Given a seed, a path is
therefore byte-identical across runs and platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolatedError, CapabilityError, ValidationError

STATIONARY_TOL = 1e-9
DIST_SUM_TOL = 1e-12


def _matrix(value, name: str) -> np.ndarray:
    m = np.asarray(value, dtype=float)
    if m.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True)
class WeightedDigraph:
    """A weighted digraph on ``n`` vertices given by its adjacency matrix."""

    weights: np.ndarray

    def __post_init__(self):
        w = _matrix(self.weights, "weights")
        if w.shape[0] != w.shape[1]:
            raise ValidationError(f"adjacency must be square, got {w.shape}")
        if np.any(np.diag(w) != 0.0):
            raise ValidationError("adjacency diagonal must be zero (no self-loops)")
        if np.any(w < 0.0):
            raise ValidationError("adjacency weights must be nonnegative")
        object.__setattr__(self, "weights", w)

    @property
    def n_vertices(self) -> int:
        return self.weights.shape[0]


def laplacian(g: WeightedDigraph) -> np.ndarray:
    """In-degree Laplacian ``diag(row sums) - weights``.

    Row sums of the result are exactly zero: the diagonal is built from the
    same floating-point row sums that are subtracted back out.
    """
    w = g.weights
    return np.diag(w.sum(axis=1)) - w


def union_graph(graphs) -> WeightedDigraph:
    """Edge-union of a graph family with summed weights."""
    graphs = list(graphs)
    if not graphs:
        raise ValidationError("union of an empty graph family is undefined")
    total = np.zeros_like(graphs[0].weights)
    for g in graphs:
        if g.weights.shape != total.shape:
            raise ValidationError("all graphs in a union must share n_vertices")
        total = total + g.weights
    return WeightedDigraph(total)


@dataclass(frozen=True)
class GraphProcess:
    """A finite family of digraphs switched by a continuous-time Markov chain.

    ``generator`` is the chain's infinitesimal generator: off-diagonal entries
    are nonnegative transition rates and every row sums to zero.
    """

    graphs: tuple
    generator: np.ndarray
    initial_distribution: np.ndarray

    def __post_init__(self):
        graphs = tuple(self.graphs)
        if not graphs:
            raise ValidationError("a graph process needs at least one graph")
        n = graphs[0].n_vertices
        if any(g.n_vertices != n for g in graphs):
            raise ValidationError("all graphs in a process must share n_vertices")
        s = len(graphs)
        gen = _matrix(self.generator, "generator")
        if gen.shape != (s, s):
            raise ValidationError(
                f"generator must be {s}x{s} to match {s} graphs, got {gen.shape}")
        off = gen - np.diag(np.diag(gen))
        if np.any(off < 0.0):
            raise ValidationError("generator off-diagonal entries must be nonnegative")
        rows = gen.sum(axis=1)
        bad = np.flatnonzero(np.abs(rows) > 1e-9)
        if bad.size:
            raise ValidationError(
                f"generator row {bad[0]} sums to {rows[bad[0]]:.3e}, expected 0")
        dist = np.asarray(self.initial_distribution, dtype=float).reshape(-1)
        if dist.shape != (s,):
            raise ValidationError(
                f"initial_distribution must have length {s}, got {dist.shape}")
        if np.any(dist < 0.0):
            raise ValidationError("initial_distribution entries must be nonnegative")
        if abs(dist.sum() - 1.0) > DIST_SUM_TOL:
            raise ValidationError(
                f"initial_distribution sums to {dist.sum():.15f}, expected 1 within {DIST_SUM_TOL}")
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "generator", gen)
        object.__setattr__(self, "initial_distribution", dist)

    @property
    def n_vertices(self) -> int:
        return self.graphs[0].n_vertices

    @property
    def n_states(self) -> int:
        return len(self.graphs)


@dataclass(frozen=True)
class SwitchingPath:
    """Piecewise-constant, right-continuous record of the active graph index."""

    breakpoints: np.ndarray  # interval start times, breakpoints[0] == 0
    states: np.ndarray       # graph index active on [breakpoints[k], next)
    horizon: float

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        st = np.asarray(self.states, dtype=int)
        if bp.ndim != 1 or st.shape != bp.shape:
            raise ValidationError("breakpoints and states must be 1-D and equal length")
        if bp.size == 0 or bp[0] != 0.0:
            raise ValidationError("first breakpoint must be 0")
        if np.any(np.diff(bp) <= 0.0):
            raise ValidationError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "states", st)

    def state_at(self, t):
        """Active graph index at time ``t`` (vectorized)."""
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        return self.states[np.clip(idx, 0, len(self.states) - 1)]


@dataclass(frozen=True)
class StationaryWeighting:
    """Common stationary vector of a graph process plus the union min cut."""

    pi: np.ndarray
    min_cut: float

    @property
    def pi_min(self) -> float:
        return float(self.pi.min())

    @property
    def pi_max(self) -> float:
        return float(self.pi.max())

    @property
    def Pi(self) -> np.ndarray:
        return np.diag(self.pi)


def mirror_union_laplacian(process: GraphProcess) -> np.ndarray:
    """Laplacian of the mirror (symmetrized) union graph.

    The union sums the adjacency matrices of all graphs in the process; the
    mirror replaces each directed weight pair by its average, giving a
    symmetric positive-semidefinite Laplacian with zero row sums.
    """
    a_union = union_graph(process.graphs).weights
    a_mirror = 0.5 * (a_union + a_union.T)
    return np.diag(a_mirror.sum(axis=1)) - a_mirror


def minimum_cut(l_s: np.ndarray) -> float:
    """Exact minimum cut of the symmetric graph encoded by Laplacian ``l_s``.

    Enumerates all 2^N - 2 nonempty proper vertex subsets, so N is capped at
    20.  The cut of a subset S sums the mirror edge weights (the negated
    off-diagonal Laplacian entries) leaving S.  For N == 1 there is no proper
    subset and the cut is vacuously +inf.
    """
    l_s = _matrix(l_s, "mirror Laplacian")
    n = l_s.shape[0]
    if l_s.shape[0] != l_s.shape[1]:
        raise ValidationError("mirror Laplacian must be square")
    if n == 1:
        return math.inf
    if n > 20:
        raise CapabilityError(f"minimum_cut enumerates 2^N subsets; N={n} > 20")
    weights = -(l_s - np.diag(np.diag(l_s)))
    best = math.inf
    masks = np.arange(n)
    for subset in range(1, (1 << n) - 1):
        inside = (subset >> masks) & 1 == 1
        cut = weights[np.ix_(inside, ~inside)].sum()
        if cut < best:
            best = cut
    return float(best)


def stationary_weighting(process: GraphProcess) -> StationaryWeighting:
    """Common positive stationary vector and union min cut of a process.

    Solves the stacked system [L_1; ...; L_s] pi = 0 via SVD, taking the
    right-singular vector of the smallest singular value and fixing its sign.
    When the stacked system is rank-deficient that vector may straddle zero,
    so the projection of the uniform vector onto the null space is tried as a
    fallback before giving up.
    """
    laps = [laplacian(g) for g in process.graphs]
    stack = np.vstack(laps)
    _, svals, vh = np.linalg.svd(stack)
    candidates = [vh[-1]]
    scale = svals[0] if svals[0] > 0 else 1.0
    null_mask = svals < STATIONARY_TOL * scale
    if null_mask.any():
        basis = vh[len(svals) - int(null_mask.sum()):]
        uniform = np.full(process.n_vertices, 1.0 / process.n_vertices)
        candidates.append(basis.T @ (basis @ uniform))

    pi = None
    for cand in candidates:
        if abs(cand.sum()) < 1e-30:
            continue
        cand = cand * np.sign(cand.sum())
        if np.any(cand <= 0.0):
            continue
        cand = cand / cand.sum()
        residual = max(np.abs(lap @ cand).max() for lap in laps)
        if residual < STATIONARY_TOL:
            pi = cand
            break
    if pi is None:
        raise AssumptionViolatedError(
            "no common positive stationary vector exists for the graph family")

    cut = minimum_cut(mirror_union_laplacian(process))
    if not cut > 0.0:
        raise AssumptionViolatedError(
            f"union mirror graph has minimum cut {cut}; joint connectivity fails")
    return StationaryWeighting(pi=pi, min_cut=cut)


def disagreement_weighting_matrix(lap: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """Weighted disagreement matrix ``Q = L Pi + Pi L^T`` for a Laplacian."""
    lap = _matrix(lap, "Laplacian")
    big_pi = np.diag(np.asarray(pi, dtype=float).reshape(-1))
    return lap @ big_pi + big_pi @ lap.T


def disagreement_lower_bound(q: np.ndarray, pi: np.ndarray, c: float, xi: np.ndarray):
    """Both sides of the disagreement bound ``xi^T Q xi >= pi_min c / N^2 |xi|^2``.

    Requires ``pi . xi == 0`` (the bound's hypothesis); returns ``(lhs, rhs)``
    so property suites can assert ``lhs >= rhs - tol`` themselves.
    """
    q = _matrix(q, "Q")
    pi = np.asarray(pi, dtype=float).reshape(-1)
    xi = np.asarray(xi, dtype=float).reshape(-1)
    n = xi.size
    if q.shape != (n, n) or pi.shape != (n,):
        raise ValidationError("Q, pi, xi dimensions are inconsistent")
    norm = float(np.linalg.norm(xi))
    if abs(float(pi @ xi)) > 1e-9 * max(1.0, norm):
        raise ValidationError("xi must be pi-orthogonal (pi . xi == 0 within 1e-9)")
    lhs = float(xi @ q @ xi)
    rhs = float(pi.min()) * float(c) / float(n * n) * norm * norm
    return lhs, rhs


def sample_switching_path(process: GraphProcess, horizon: float, seed: int) -> SwitchingPath:
    """Sample the Markov chain's graph index over ``[0, horizon)``.

    The initial state follows ``initial_distribution``; the holding time in
    state p is exponential with rate ``-generator[p, p]`` (infinite when that
    rate is zero); the jump lands on q != p with probability
    ``generator[p, q] / -generator[p, p]``.  Deterministic given the seed.
    """
    if not horizon > 0.0:
        raise ValidationError("horizon must be positive")
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    rates = -np.diag(process.generator)

    def draw_discrete(probabilities) -> int:
        u = gen.random()
        acc = 0.0
        for idx, p in enumerate(probabilities):
            acc += p
            if u < acc:
                return idx
        return len(probabilities) - 1

    state = draw_discrete(process.initial_distribution)
    breakpoints = [0.0]
    states = [state]
    t = 0.0
    while True:
        rate = rates[state]
        if rate <= 0.0:
            break
        t += -math.log1p(-gen.random()) / rate
        if t >= horizon:
            break
        jump_probs = process.generator[state] / rate
        jump_probs = np.where(np.arange(process.n_states) == state, 0.0, jump_probs)
        state = draw_discrete(jump_probs)
        breakpoints.append(t)
        states.append(state)
    return SwitchingPath(breakpoints=np.array(breakpoints),
                         states=np.array(states, dtype=int),
                         horizon=float(horizon))
