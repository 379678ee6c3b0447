"""Chain recording: thinned samples, PPI accumulators and acceptance."""
import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from core.models import EdgeIndicators, nodes_from_pairs

logger = logging.getLogger(__name__)


class Acceptance:
    """Accepted and proposed counts per move type."""

    def __init__(self):
        self.counts = defaultdict(lambda: [0, 0])

    def record(self, move, accepted):
        entry = self.counts[move]
        entry[0] += int(bool(accepted))
        entry[1] += 1

    def rate(self, move):
        accepted, proposed = self.counts.get(move, (0, 0))
        return accepted / proposed if proposed else 0.0

    def rates(self):
        return {move: self.rate(move) for move in sorted(self.counts)}

    def as_dict(self):
        return {
            move: {'accepted': acc, 'proposed': prop}
            for move, (acc, prop) in sorted(self.counts.items())
        }

    def __str__(self):
        return ', '.join(f'{move}={rate:.3f}'
                         for move, rate in self.rates().items())


@dataclass(eq=False)
class ChainOutput:
    """Thinned draws of one chain plus its post-burn-in PPI accumulator.

    ``iterations`` holds the 1-based iteration number of every recorded
    draw; ``delta`` is (draws, q, m), ``theta``/``epsilon`` are
    (draws, q, q), ``nu`` is (draws, m) and ``lam`` is (draws, q, p + m)
    or None when canonical parameters are not kept.
    """
    engine: str
    labels: list
    columns: tuple
    iterations: np.ndarray
    delta: np.ndarray
    theta: np.ndarray
    epsilon: np.ndarray
    nu: np.ndarray
    lam: object = None
    ppi_counts: object = None
    ppi_retained: int = 0
    burn_in: int = 0
    acceptance: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.iterations = np.asarray(self.iterations, dtype=np.int64)
        self.delta = np.asarray(self.delta, dtype=np.uint8)
        self.theta = np.asarray(self.theta, dtype=float)
        self.epsilon = np.asarray(self.epsilon, dtype=np.uint8)
        self.nu = np.asarray(self.nu, dtype=float)
        if self.ppi_counts is None:
            self.ppi_counts = np.zeros(self.delta.shape[1:], dtype=np.int64)
        self.labels = [str(label) for label in self.labels]
        self.columns = tuple(self.columns)

    @property
    def q(self):
        return self.delta.shape[1]

    @property
    def m(self):
        return self.delta.shape[2]

    @property
    def p(self):
        return nodes_from_pairs(self.m)

    @property
    def draws(self):
        return self.iterations.size

    @property
    def total_iterations(self):
        return int(self.meta.get('iterations', self.iterations.max(initial=0)))

    def retained(self, burn_in):
        """Boolean mask of the draws recorded after ``burn_in``."""
        return self.iterations > burn_in

    def final_graphs(self):
        if not self.draws:
            return [EdgeIndicators.empty(self.p) for _ in range(self.q)]
        return [EdgeIndicators(bits) for bits in self.delta[-1]]


class ChainRecorder:
    """Collects the state of a running chain into a ChainOutput."""

    def __init__(self, engine, data, config, keep_lambda=False):
        self.engine = engine
        self.data = data
        self.config = config
        self.keep_lambda = keep_lambda
        self.acceptance = Acceptance()
        self.rows = defaultdict(list)
        self.ppi_counts = None
        self.ppi_retained = 0
        self.started = time.perf_counter()

    def step(self, t, delta, coupling, lam=None):
        """Account for completed iteration ``t`` (1-based)."""
        if t > self.config.burn_in:
            if self.ppi_counts is None:
                self.ppi_counts = np.zeros(delta.shape, dtype=np.int64)
            self.ppi_counts += delta
            self.ppi_retained += 1
        if t % self.config.thin == 0:
            self.record(t, delta, coupling, lam)
        log_every = self.config.log_every
        if log_every and t % log_every == 0:
            logger.info('%s chain iteration %d/%d: %s', self.engine, t,
                        self.config.iterations, self.acceptance)

    def record(self, t, delta, coupling, lam=None):
        self.rows['iterations'].append(t)
        self.rows['delta'].append(delta.copy())
        self.rows['theta'].append(coupling.theta.copy())
        self.rows['epsilon'].append(coupling.epsilon.copy())
        self.rows['nu'].append(coupling.nu.copy())
        if self.keep_lambda and lam is not None:
            self.rows['lam'].append(
                np.stack([params.vector() for params in lam])
            )

    def finish(self, initial, **meta):
        data = self.data
        q, p = data.q, data.p
        m = p * (p - 1) // 2
        elapsed = time.perf_counter() - self.started
        iterations = self.config.iterations

        def stacked(name, shape, dtype=float):
            rows = self.rows.get(name)
            if not rows:
                return np.zeros((0,) + shape, dtype=dtype)
            return np.stack(rows)

        meta.update({
            'engine': self.engine,
            'iterations': iterations,
            'burn_in': self.config.burn_in,
            'thin': self.config.thin,
            'seed': self.config.seed,
            'config': self.config.as_dict(),
            'initial': initial,
            'wall_time': elapsed,
            'seconds_per_iteration': elapsed / iterations if iterations
            else 0.0,
            'acceptance_rates': self.acceptance.rates(),
        })
        lam = None
        if self.keep_lambda:
            lam = stacked('lam', (q, p + m))
        return ChainOutput(
            engine=self.engine,
            labels=data.labels,
            columns=data.columns,
            iterations=np.asarray(self.rows.get('iterations', []),
                                  dtype=np.int64),
            delta=stacked('delta', (q, m), np.uint8),
            theta=stacked('theta', (q, q)),
            epsilon=stacked('epsilon', (q, q), np.uint8),
            nu=stacked('nu', (m,)),
            lam=lam,
            ppi_counts=self.ppi_counts if self.ppi_counts is not None
            else np.zeros((q, m), dtype=np.int64),
            ppi_retained=self.ppi_retained,
            burn_in=self.config.burn_in,
            acceptance=self.acceptance.as_dict(),
            meta=meta,
        )
