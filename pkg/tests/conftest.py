import numpy as np
import pytest

from resopt.cost import CostSpec
from resopt.graph import WeightedDigraph
from resopt.plant import AgentModel

# The three heterogeneous demonstration agents (dimensions 2, 2, 3) with
# their stabilizing gains and pinned regulator triples.
AGENT_DATA = [
    dict(A=[[0.0, 1.0], [0.0, 0.0]],
         B=[[0.0, 1.0], [1.0, -2.0]],
         C=[[1.0, 1.0]],
         K=[[3.0, 5.0], [1.5, 1.0]],
         U=[[1.0], [0.5]], W=[[1.5], [0.5]], X=[[0.5], [0.5]]),
    dict(A=[[0.0, -1.0], [1.0, -2.0]],
         B=[[1.0, 0.0], [3.0, -1.0]],
         C=[[-1.0, 1.0]],
         K=[[0.75, -1.0], [1.25, -4.0]],
         U=[[-0.5], [0.0]], W=[[-0.5], [-2.0]], X=[[-0.5], [0.5]]),
    dict(A=[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 1.0, -2.0]],
         B=[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
         C=[[1.0, -1.0, 1.0]],
         K=[[2.167, 1.0, 0.333], [0.0, 3.0, 1.0]],
         U=[[-1.0], [0.0]], W=[[0.0], [-1.0]], X=[[0.0], [-1.0], [0.0]]),
]

GENERATOR = [[-0.1, 0.02, 0.08], [0.3, -0.5, 0.2], [0.1, 0.1, -0.2]]
RAW_DIST = np.array([0.5882, 0.1500, 0.3235])

# Reference optimum of the three bundled costs, pinned by an independent
# high-precision bisection of the summed gradient on [-1, 0].
THETA_STAR = -0.1998223793056702


@pytest.fixture(scope="session")
def demo_agents():
    return tuple(AgentModel.build(d["A"], d["B"], d["C"], d["K"],
                                  d["U"], d["W"], d["X"]) for d in AGENT_DATA)


@pytest.fixture(scope="session")
def demo_costs():
    return (CostSpec("exp_pair", (-2.0, -0.5, 0.5, 0.3)),
            CostSpec("quartic", (1.0, 2.0, 2.0)),
            CostSpec("log_quadratic", (0.5, 1.0)))


@pytest.fixture(scope="session")
def bundled_process():
    from resopt.cli import preset_scenario
    return preset_scenario("case1").scenario.graph_process


def single_edge(n, j, i, weight=1.0):
    """Digraph on n vertices with the single edge j -> i."""
    a = np.zeros((n, n))
    a[i, j] = weight
    return WeightedDigraph(a)
