import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from conftest import GENERATOR, RAW_DIST, single_edge
from resopt.errors import (AssumptionViolatedError, CapabilityError,
                           ValidationError)
from resopt.graph import (GraphProcess, WeightedDigraph, laplacian,
                          disagreement_lower_bound, disagreement_weighting_matrix,
                          minimum_cut, mirror_union_laplacian,
                          sample_switching_path, stationary_weighting,
                          union_graph)


def random_graph(rng, n, density=0.5, scale=2.0):
    a = rng.random((n, n)) * scale * (rng.random((n, n)) < density)
    np.fill_diagonal(a, 0.0)
    return WeightedDigraph(a)


class TestWeightedDigraph:
    def test_rejects_self_loops(self):
        with pytest.raises(ValidationError):
            WeightedDigraph(np.eye(2))

    def test_rejects_negative_weights(self):
        with pytest.raises(ValidationError):
            WeightedDigraph([[0.0, -1.0], [0.0, 0.0]])


class TestLaplacian:
    def test_single_edge(self):
        # info flows from vertex 2 to vertex 1, i.e. a_12 = 1
        g = WeightedDigraph([[0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_array_equal(laplacian(g), [[1.0, -1.0], [0.0, 0.0]])

    def test_empty_graph(self):
        g = WeightedDigraph(np.zeros((3, 3)))
        np.testing.assert_array_equal(laplacian(g), np.zeros((3, 3)))

    def test_three_cycle(self):
        g = single_edge(3, 0, 1).weights + single_edge(3, 1, 2).weights \
            + single_edge(3, 2, 0).weights
        lap = laplacian(WeightedDigraph(g))
        np.testing.assert_array_equal(np.diag(lap), np.ones(3))
        np.testing.assert_array_equal(lap.sum(axis=1), np.zeros(3))

    @given(st.integers(2, 7), st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_row_sums_zero_at_machine_precision(self, n, seed):
        # construction cancels the same floats, so the residual is a few ULPs
        # of the row scale, far below any rounding tolerance
        g = random_graph(np.random.default_rng(seed), n)
        scale = max(1.0, g.weights.max())
        assert np.abs(laplacian(g).sum(axis=1)).max() <= 4 * np.finfo(float).eps * scale


class TestMirrorUnion:
    def test_single_directed_edge(self):
        proc = GraphProcess(graphs=(single_edge(2, 0, 1),),
                            generator=[[0.0]], initial_distribution=[1.0])
        np.testing.assert_allclose(mirror_union_laplacian(proc),
                                   [[0.5, -0.5], [-0.5, 0.5]])

    def test_symmetric_union_is_fixed_point(self):
        a = np.array([[0.0, 2.0], [2.0, 0.0]])
        proc = GraphProcess(graphs=(WeightedDigraph(a),),
                            generator=[[0.0]], initial_distribution=[1.0])
        np.testing.assert_allclose(mirror_union_laplacian(proc),
                                   laplacian(WeightedDigraph(a)))

    def test_bundled_process_symmetric_zero_rowsums(self, bundled_process):
        mirror = mirror_union_laplacian(bundled_process)
        np.testing.assert_allclose(mirror, mirror.T)
        np.testing.assert_allclose(mirror.sum(axis=1), 0.0, atol=1e-12)
        eigs = np.linalg.eigvalsh(mirror)
        assert eigs.min() > -1e-9


def brute_force_cut(l_s):
    """Independent reference: enumerate subsets with itertools."""
    n = l_s.shape[0]
    w = -(l_s - np.diag(np.diag(l_s)))
    best = np.inf
    for size in range(1, n):
        for subset in itertools.combinations(range(n), size):
            inside = np.zeros(n, dtype=bool)
            inside[list(subset)] = True
            best = min(best, w[np.ix_(inside, ~inside)].sum())
    return best


class TestMinimumCut:
    def test_two_vertices(self):
        l_s = np.array([[0.5, -0.5], [-0.5, 0.5]])
        assert minimum_cut(l_s) == pytest.approx(0.5)

    def test_disconnected(self):
        l_s = np.zeros((3, 3))
        assert minimum_cut(l_s) == 0.0

    def test_three_path_unit_weights(self):
        # path 1 - 2 - 3: six cuts, the cheapest severs one end edge
        l_s = np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
        assert minimum_cut(l_s) == pytest.approx(1.0)

    def test_capability_limit(self):
        with pytest.raises(CapabilityError):
            minimum_cut(np.zeros((21, 21)))

    @given(st.integers(2, 8), st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_matches_brute_force(self, n, seed):
        g = random_graph(np.random.default_rng(seed), n)
        a = 0.5 * (g.weights + g.weights.T)
        l_s = np.diag(a.sum(axis=1)) - a
        assert minimum_cut(l_s) == pytest.approx(brute_force_cut(l_s))


class TestStationaryWeighting:
    def test_weight_balanced_gives_uniform(self):
        # a directed cycle is weight balanced
        a = single_edge(3, 0, 1).weights + single_edge(3, 1, 2).weights \
            + single_edge(3, 2, 0).weights
        proc = GraphProcess(graphs=(WeightedDigraph(a),),
                            generator=[[0.0]], initial_distribution=[1.0])
        sw = stationary_weighting(proc)
        np.testing.assert_allclose(sw.pi, np.full(3, 1.0 / 3.0), atol=1e-12)
        assert sw.min_cut == pytest.approx(1.0)

    def test_single_strongly_connected(self):
        rng = np.random.default_rng(5)
        a = rng.random((4, 4)) + 0.1
        np.fill_diagonal(a, 0.0)
        proc = GraphProcess(graphs=(WeightedDigraph(a),),
                            generator=[[0.0]], initial_distribution=[1.0])
        sw = stationary_weighting(proc)
        lap = laplacian(WeightedDigraph(a))
        assert np.abs(lap @ sw.pi).max() < 1e-9
        assert np.all(sw.pi > 0.0)
        assert sw.pi.sum() == pytest.approx(1.0)
        # cross-check against scipy's null space of the Laplacian
        null = scipy.linalg.null_space(lap)
        ref = null[:, 0] / null[:, 0].sum()
        np.testing.assert_allclose(sw.pi, ref, atol=1e-9)

    def test_bundled_process_uniform(self, bundled_process):
        sw = stationary_weighting(bundled_process)
        np.testing.assert_allclose(sw.pi, np.full(3, 1.0 / 3.0), atol=1e-9)
        assert sw.min_cut > 0.0

    def test_disconnected_union_rejected(self):
        # two isolated blocks: the union mirror has a zero cut
        a = np.zeros((4, 4))
        a[0, 1] = a[1, 0] = 1.0
        a[2, 3] = a[3, 2] = 1.0
        proc = GraphProcess(graphs=(WeightedDigraph(a),),
                            generator=[[0.0]], initial_distribution=[1.0])
        with pytest.raises(AssumptionViolatedError):
            stationary_weighting(proc)


class TestDisagreementBound:
    def test_zero_vector(self):
        q = np.zeros((2, 2))
        lhs, rhs = disagreement_lower_bound(q, [0.5, 0.5], 1.0, [0.0, 0.0])
        assert lhs == 0.0 and rhs == 0.0

    def test_two_vertex_balanced(self):
        # bidirectional unit edge: L = [[1,-1],[-1,1]], pi uniform
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        lap = laplacian(WeightedDigraph(a))
        pi = np.array([0.5, 0.5])
        q = disagreement_weighting_matrix(lap, pi)
        xi = np.array([1.0, -1.0]) / np.sqrt(2.0)
        lhs, rhs = disagreement_lower_bound(q, pi, 1.0, xi)
        # direct evaluation: Q = L here, so xi^T Q xi = (xi1 - xi2)^2 = 2
        assert lhs == pytest.approx(2.0)
        assert rhs == pytest.approx(0.5 * 1.0 / 4.0)
        assert lhs >= rhs - 1e-9

    def test_orthogonality_precondition(self):
        with pytest.raises(ValidationError):
            disagreement_lower_bound(np.zeros((2, 2)), [0.5, 0.5], 1.0, [1.0, 1.0])

    def test_monte_carlo_on_bundled_union(self, bundled_process):
        sw = stationary_weighting(bundled_process)
        lap_un = laplacian(union_graph(bundled_process.graphs))
        q = disagreement_weighting_matrix(lap_un, sw.pi)
        rng = np.random.default_rng(42)
        for _ in range(1000):
            xi = rng.standard_normal(3)
            xi -= sw.pi * (sw.pi @ xi) / (sw.pi @ sw.pi)
            lhs, rhs = disagreement_lower_bound(q, sw.pi, sw.min_cut, xi)
            assert lhs >= rhs - 1e-9


class TestSwitchingPath:
    def make_process(self):
        graphs = tuple(single_edge(3, j, (j + 1) % 3) for j in range(3))
        return GraphProcess(graphs=graphs, generator=GENERATOR,
                            initial_distribution=RAW_DIST / RAW_DIST.sum())

    def test_zero_generator_single_interval(self):
        graphs = (single_edge(2, 0, 1), single_edge(2, 1, 0))
        proc = GraphProcess(graphs=graphs, generator=np.zeros((2, 2)),
                            initial_distribution=[0.3, 0.7])
        path = sample_switching_path(proc, 50.0, seed=3)
        assert len(path.states) == 1
        assert path.breakpoints[0] == 0.0

    def test_deterministic_given_seed(self):
        proc = self.make_process()
        p1 = sample_switching_path(proc, 200.0, seed=11)
        p2 = sample_switching_path(proc, 200.0, seed=11)
        np.testing.assert_array_equal(p1.breakpoints, p2.breakpoints)
        np.testing.assert_array_equal(p1.states, p2.states)

    def test_mean_holding_time_state_one(self):
        # rate out of state 1 is 0.1, so the mean holding time is 10 s;
        # censoring at horizon 120 shifts the mean by under 1e-4 relative
        proc = self.make_process()
        horizon = 120.0
        holds = []
        seed = 0
        while len(holds) < 10_000:
            path = sample_switching_path(proc, horizon, seed=seed)
            seed += 1
            if path.states[0] == 0:
                first_end = path.breakpoints[1] if len(path.breakpoints) > 1 \
                    else horizon
                holds.append(first_end)
        mean = np.mean(holds)
        assert abs(mean - 10.0) / 10.0 < 0.05

    def test_occupancy_matches_chain_stationary_law(self):
        proc = self.make_process()
        horizon = 6e5
        path = sample_switching_path(proc, horizon, seed=123)
        bounds = np.append(path.breakpoints, horizon)
        occupancy = np.zeros(3)
        for state, lo, hi in zip(path.states, bounds[:-1], bounds[1:]):
            occupancy[state] += hi - lo
        occupancy /= horizon
        # stationary law of the generator, via scipy (independent oracle)
        null = scipy.linalg.null_space(np.asarray(GENERATOR, dtype=float).T)
        stat = null[:, 0] / null[:, 0].sum()
        assert 0.5 * np.abs(occupancy - stat).sum() < 0.02

    def test_state_at_right_continuous(self):
        proc = self.make_process()
        path = sample_switching_path(proc, 100.0, seed=1)
        if len(path.breakpoints) > 1:
            t = path.breakpoints[1]
            assert path.state_at(t) == path.states[1]
            assert path.state_at(t - 1e-9) == path.states[0]


class TestGraphProcessValidation:
    def test_generator_row_sum_rejected(self):
        with pytest.raises(ValidationError, match="row"):
            GraphProcess(graphs=(single_edge(2, 0, 1), single_edge(2, 1, 0)),
                         generator=[[-0.1, 0.2], [0.1, -0.1]],
                         initial_distribution=[0.5, 0.5])

    def test_distribution_must_sum_to_one(self):
        with pytest.raises(ValidationError, match="sums to"):
            GraphProcess(graphs=(single_edge(2, 0, 1), single_edge(2, 1, 0)),
                         generator=np.zeros((2, 2)),
                         initial_distribution=[0.6, 0.5])
