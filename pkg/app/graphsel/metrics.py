"""Scores of estimated graphs against a known truth, and chain agreement."""
import math
from collections import namedtuple

import numpy as np
from scipy import stats

from core.models import EdgeIndicators

from .summaries import Degenerate, PpiTable, SelectedGraphs

Confusion = namedtuple('Confusion', ['tp', 'tn', 'fp', 'fn'])


def _bits(graphs):
    if isinstance(graphs, SelectedGraphs):
        return graphs.bits()
    return np.stack([
        graph.bits if isinstance(graph, EdgeIndicators)
        else np.asarray(graph, dtype=np.uint8).reshape(-1)
        for graph in graphs
    ])


def confusion(truth, estimate):
    """Pooled confusion counts over every group-edge decision."""
    true, est = _bits(truth).astype(bool), _bits(estimate).astype(bool)
    if true.shape != est.shape:
        raise ValueError(
            f'Truth {true.shape} and estimate {est.shape} differ in shape.'
        )
    return Confusion(
        tp=int(np.sum(true & est)),
        tn=int(np.sum(~true & ~est)),
        fp=int(np.sum(~true & est)),
        fn=int(np.sum(true & ~est)),
    )


def mcc_from_counts(counts):
    tp, tn, fp, fn = counts
    denominator = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denominator == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denominator)


def f1_from_counts(counts):
    tp, _, fp, fn = counts
    if tp == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def mcc(truth, estimate):
    """Matthews correlation of the pooled decisions; 0 when undefined."""
    return mcc_from_counts(confusion(truth, estimate))


def f1(truth, estimate):
    """F1 score of the pooled decisions; 0 when precision or recall is 0."""
    return f1_from_counts(confusion(truth, estimate))


def per_group_scores(truth, estimate, labels=None):
    """Confusion counts, MCC and F1 of every group separately."""
    true, est = _bits(truth), _bits(estimate)
    if labels is None:
        labels = getattr(estimate, 'labels', None) or \
            [str(x) for x in range(true.shape[0])]
    scores = []
    for label, t, e in zip(labels, true, est):
        counts = confusion([t], [e])
        scores.append({
            'group': label,
            **counts._asdict(),
            'mcc': mcc_from_counts(counts),
            'f1': f1_from_counts(counts),
        })
    return scores


def chain_correlation(first, second):
    """Pearson correlation of two flattened PPI tables.

    Returns ``Degenerate.CONSTANT`` when either table is constant.
    """
    a = first.values if isinstance(first, PpiTable) else np.asarray(first)
    b = second.values if isinstance(second, PpiTable) else np.asarray(second)
    if a.shape != b.shape:
        raise ValueError(
            f'PPI tables of shapes {a.shape} and {b.shape} differ.'
        )
    a, b = a.reshape(-1), b.reshape(-1)
    if a.size < 2 or np.ptp(a) == 0 or np.ptp(b) == 0:
        return Degenerate.CONSTANT
    return float(stats.pearsonr(a, b)[0])
