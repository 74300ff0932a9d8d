"""
Graph and transition matrix construction for N series-coupled rings

One walk step is one half-ring traversal. Couplers are numbered 1 .. N+1:
coupler 1 joins the input bus and ring 1, coupler j+1 joins ring j and
ring j+1, coupler N+1 joins ring N and the drop bus.
"""
import logging
import math

import numpy as np
import pandas as pd

from chain.models import CLASSICAL, QUANTUM, Edge, NodeGraph, RingChainSpec, TransitionMatrix
from utils.errors import SpecValidationError
from utils.export import format_float

logger = logging.getLogger(__name__)


def _forward(ring: int) -> int:
    """Node index of the half of ring j running from coupler j to j+1"""
    return 2 * ring - 1


def _backward(ring: int) -> int:
    """Node index of the half of ring j running from coupler j+1 back to j"""
    return 2 * ring


def build_chain(spec: RingChainSpec) -> NodeGraph:
    """
    Build the walk graph for a chain spec

    Returns:
        NodeGraph with 2N+3 nodes ordered [P0, P1, ..., P{2N}, PD, PT]
    """
    n = spec.num_rings
    nodes = tuple(f"P{i}" for i in range(2 * n + 1)) + ('PD', 'PT')
    drop, thru = 2 * n + 1, 2 * n + 2

    # Input bus: cross into ring 1 (carries the minus sign) or pass to Thru
    edges = [
        Edge(source=0, target=_forward(1), coupling='k', coupler=1, ring=None, sign=-1),
        Edge(source=0, target=thru, coupling='t', coupler=1, ring=None),
    ]
    for j in range(1, n + 1):
        fwd, back = _forward(j), _backward(j)
        # Forward half arrives at coupler j+1
        if j < n:
            edges.append(Edge(source=fwd, target=back, coupling='t', coupler=j + 1, ring=j))
            edges.append(Edge(source=fwd, target=_forward(j + 1), coupling='k', coupler=j + 1, ring=j))
        else:
            edges.append(Edge(source=fwd, target=back, coupling='t', coupler=n + 1, ring=j))
            edges.append(Edge(source=fwd, target=drop, coupling='k', coupler=n + 1, ring=j))
        # Backward half arrives at coupler j
        if j == 1:
            edges.append(Edge(source=back, target=_forward(1), coupling='t', coupler=1, ring=1))
            edges.append(Edge(source=back, target=thru, coupling='k', coupler=1, ring=1))
        else:
            edges.append(Edge(source=back, target=_backward(j - 1), coupling='k', coupler=j, ring=j, sign=-1))
            edges.append(Edge(source=back, target=fwd, coupling='t', coupler=j, ring=j))

    graph = NodeGraph(spec=spec, nodes=nodes, edges=tuple(edges))
    logger.debug(f"Built graph with {graph.dimension} nodes and {len(edges)} edges for {n} ring(s)")
    return graph


def _hop_weight(spec: RingChainSpec, edge: Edge) -> float:
    k = spec.couplings[edge.coupler - 1]
    return k if edge.coupling == 'k' else 1.0 - k


def _absorbing_identity(graph: NodeGraph, matrix: np.ndarray) -> None:
    for idx in graph.absorbing:
        matrix[idx, idx] = 1.0


def classical_transfer_matrix(graph: NodeGraph) -> TransitionMatrix:
    """
    Hopping probabilities; each half-ring hop is damped by α_j^{1/2}

    For one and two rings this is the printed 5x5 / 7x7 Markov matrix.
    """
    spec = graph.spec
    matrix = np.zeros((graph.dimension, graph.dimension), dtype=float)
    for edge in graph.edges:
        weight = _hop_weight(spec, edge)
        if edge.ring is not None:
            weight *= math.sqrt(spec.loss_per_round[edge.ring - 1])
        matrix[edge.target, edge.source] = weight
    _absorbing_identity(graph, matrix)
    tm = TransitionMatrix(kind=CLASSICAL, matrix=matrix, graph=graph)
    if not check_stochastic(tm):
        raise SpecValidationError(f"classical matrix columns sum to {tm.column_sums()}, expected at most 1")
    return tm


def quantum_transfer_matrix(graph: NodeGraph) -> TransitionMatrix:
    """
    Transition amplitudes: square roots of the hop probabilities times γ_j^{1/2}

    The input coupling and every backward inter-ring coupling carry a minus
    sign so each coupler acts unitarily.
    """
    spec = graph.spec
    half_trips = spec.half_trip_factors()
    matrix = np.zeros((graph.dimension, graph.dimension), dtype=complex)
    for edge in graph.edges:
        amplitude = edge.sign * math.sqrt(_hop_weight(spec, edge))
        if edge.ring is not None:
            amplitude = amplitude * half_trips[edge.ring - 1]
        matrix[edge.target, edge.source] = amplitude
    _absorbing_identity(graph, matrix)
    tm = TransitionMatrix(kind=QUANTUM, matrix=matrix, graph=graph)
    lossless = all(a == 1.0 for a in spec.loss_per_round)
    if (lossless and not check_isometry(tm)) or np.any(tm.column_norms() > 1.0 + 1e-12):
        raise SpecValidationError("quantum matrix does not preserve or contract the norm of transient columns")
    return tm


def transfer_matrix(spec: RingChainSpec, regime: str) -> TransitionMatrix:
    """Build graph and matrix for the given regime in one call"""
    graph = build_chain(spec)
    if regime == CLASSICAL:
        return classical_transfer_matrix(graph)
    if regime == QUANTUM:
        return quantum_transfer_matrix(graph)
    raise SpecValidationError(f"unknown regime {regime!r}, expected 'classical' or 'quantum'")


def check_stochastic(tm: TransitionMatrix, tol: float = 1e-12) -> bool:
    """Column sums equal 1 when lossless, at most 1 otherwise"""
    sums = tm.column_sums().real
    if all(a == 1.0 for a in tm.graph.spec.loss_per_round):
        return bool(np.all(np.abs(sums - 1.0) <= tol))
    return bool(np.all(sums <= 1.0 + tol))


def check_isometry(tm: TransitionMatrix, tol: float = 1e-12) -> bool:
    """Gram matrix of the non-absorbing source columns equals the identity"""
    cols = tm.matrix[:, list(tm.graph.transient)]
    gram = cols.conj().T @ cols
    return bool(np.allclose(gram, np.eye(gram.shape[0]), rtol=0.0, atol=tol))


def dump_matrix_csv(tm: TransitionMatrix, path: str) -> None:
    """Row-major CSV dump; complex entries are written as "re,im" pairs"""
    if tm.kind == QUANTUM:
        cells = [[f"{format_float(z.real)},{format_float(z.imag)}" for z in row] for row in tm.matrix]
    else:
        cells = [[format_float(x) for x in row] for row in tm.matrix]
    frame = pd.DataFrame(cells, index=tm.graph.nodes, columns=tm.graph.nodes)
    frame.to_csv(path, index_label='target\\source', lineterminator='\n')
    logger.info(f"Transition matrix ({tm.kind}) written to {path}")
