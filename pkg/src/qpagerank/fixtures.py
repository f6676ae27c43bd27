"""Small named graphs and perturbations used by the acceptance suite and the CLI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import DirectedGraph, GoogleMatrix, MatrixSeries, build_google

EDGE_LISTS = {
    "two_cycle": "1\t2\n2\t1\n",
    "dangling_chain": "nodes: 2\n1\t2\n",
    "k3": "".join(f"{i}\t{j}\n" for i in range(1, 4) for j in range(1, 4) if i != j),
    "four_node": "1\t2\n1\t3\n2\t3\n3\t1\n3\t4\n4\t1\n",
}

_K3_WALK = np.full((3, 3), 0.5) - 0.5 * np.eye(3)
_K3_BREAK = np.array([[-0.1, 0.1, 0.0], [0.1, -0.1, 0.0], [0.0, 0.0, 0.0]])

PERTURBATIONS: dict[str, tuple[str, list[np.ndarray]]] = {
    "two_cycle": ("two_cycle", [np.array([[0.1, -0.1], [0.0, 0.0]])]),
    "k3_breaking": ("k3", [_K3_BREAK]),
    # first order keeps the 2-fold eigenvalue, second order splits it
    "k3_preserving": ("k3", [0.5 * (_K3_WALK - np.full((3, 3), 1.0 / 3.0)), _K3_BREAK]),
    "four_node": (
        "four_node",
        [
            np.array(
                [
                    [0.017, 0.041, 0.017, -0.075],
                    [0.045, 0.022, -0.027, -0.040],
                    [0.018, 0.015, 0.001, -0.034],
                    [-0.037, -0.008, -0.024, 0.069],
                ]
            )
        ],
    ),
}


def graph(name: str) -> DirectedGraph:
    from .graph import load_edge_list

    return load_edge_list(EDGE_LISTS[name])


def google(name: str, alpha: float = 0.85) -> GoogleMatrix:
    return build_google(graph(name), alpha)


@dataclass(frozen=True)
class PerturbedFixture:
    name: str
    graph_name: str
    google: GoogleMatrix
    series: MatrixSeries


def perturbed(name: str, alpha: float = 0.85) -> PerturbedFixture:
    gname, terms = PERTURBATIONS[name]
    G = google(gname, alpha)
    return PerturbedFixture(name, gname, G, MatrixSeries.build(G.entries, terms))


def zero_perturbation(name: str, alpha: float = 0.85) -> MatrixSeries:
    G = google(name, alpha)
    return MatrixSeries.build(G.entries, [np.zeros_like(G.entries)])


def random_graph(rng: np.random.Generator, n_min: int = 2, n_max: int = 8, p: float = 0.4) -> DirectedGraph:
    n = int(rng.integers(n_min, n_max + 1))
    edges = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j and rng.random() < p]
    return DirectedGraph.from_edges(n, edges)


def random_perturbation(rng: np.random.Generator, G: np.ndarray, orders: int = 2, scale: float = 0.05) -> MatrixSeries:
    """Zero-row-sum terms small enough to keep every entry positive near chi = 0."""
    n = G.shape[0]
    terms = []
    for _ in range(orders):
        X = rng.normal(size=(n, n)) * scale * G.min()
        X -= X.mean(axis=1, keepdims=True)
        terms.append(X)
    return MatrixSeries.build(G, terms)
