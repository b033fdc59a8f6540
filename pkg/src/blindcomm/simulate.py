"""Signal generation for the filtered-PPM observation model."""

from __future__ import annotations

import numpy as np

from .covariance import SignalBatch
from .excitation import ExcitationSource
from .graph_filter import FilterSpec, apply_filter
from .graph_model import PartitionIndicator, model_labels, sample_graphs, split_union  # noqa: F401
from .rng import as_generator

# Graphs drawn per vectorized batch. Part of the reproducibility contract:
# changing it changes which random numbers feed which graph.
GRAPH_BATCH = 256


def generate_signals(params, labels: PartitionIndicator, spec: FilterSpec,
                     source: ExcitationSource, m: int, rng=None, redraw_p: float = 1.0,
                     self_loops: bool = False) -> SignalBatch:
    """Draw ``m`` signals ``y_l = H(S_l) w_l``, returned as rows of an ``(m, n)`` batch.

    ``redraw_p = 1`` gives an independent graph per signal; smaller values run
    the Bernoulli graph process, where the graph is kept for the next signal
    with probability ``1 - redraw_p``.
    """
    rng = as_generator(rng)
    if m < 1:
        raise ValueError("m must be at least 1")
    if not 0.0 <= redraw_p <= 1.0:
        raise ValueError("redraw probability must lie in [0, 1]")
    n = labels.n
    out = np.empty((m, n))
    if redraw_p >= 1.0:
        # One graph per signal: filter a whole batch on the disjoint union at once.
        for start in range(0, m, GRAPH_BATCH):
            count = min(GRAPH_BATCH, m - start)
            union = sample_graphs(params, labels, count, rng, self_loops)
            w = source.draw(rng, count)          # (n, count)
            y = apply_filter(spec, union, w.T.reshape(-1))
            out[start:start + count] = y.reshape(count, n)
        graphs = m
    else:
        flags = np.ones(m, dtype=bool)
        flags[1:] = rng.random(m - 1) < redraw_p
        starts = np.flatnonzero(flags)
        ends = np.append(starts[1:], m)
        pool = []
        for run, (start, end) in enumerate(zip(starts, ends)):
            if run % GRAPH_BATCH == 0:
                count = min(GRAPH_BATCH, starts.size - run)
                pool = split_union(sample_graphs(params, labels, count, rng, self_loops), n)
            graph = pool[run % GRAPH_BATCH]
            out[start:end] = apply_filter(spec, graph, source.draw(rng, end - start)).T
        graphs = int(starts.size)
    meta = {"excitation": source.spec.kind, "filter": spec.to_json(), "redrawP": redraw_p,
            "graphs": graphs}
    return SignalBatch(out, meta)
