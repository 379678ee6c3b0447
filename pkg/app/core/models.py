"""Domain types for grouped binary data and multiple Ising models.

Node pairs are always enumerated in one canonical order, row-major over
the strict lower triangle: (2,1), (3,1), (3,2), (4,1), ... in 1-based
labels. Every vector indexed by pairs (interactions, edge indicators,
edge-specific sparsity parameters) uses that order.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import logit

from .exceptions import DataError


def n_pairs(p):
    """Return the number of unordered node pairs among p nodes."""
    return p * (p - 1) // 2


def nodes_from_pairs(m):
    """Return p such that p(p-1)/2 == m."""
    p = int(round((1 + math.sqrt(1 + 8 * m)) / 2))
    if n_pairs(p) != m:
        raise ValueError(f'{m} is not a triangular number of pairs.')
    return p


@lru_cache(maxsize=64)
def pair_index(p):
    """Return (rows, cols) arrays of the canonical pair order, rows > cols."""
    rows, cols = np.tril_indices(p, -1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def pair_labels(p):
    """Return the 1-based (r, j) label of every pair in canonical order."""
    rows, cols = pair_index(p)
    return [(int(r) + 1, int(j) + 1) for r, j in zip(rows, cols)]


def row_slice(r):
    """Return the slice holding the interactions (r, j), j < r."""
    start = r * (r - 1) // 2
    return slice(start, start + r)


def _as_binary(values, what):
    arr = np.asarray(values)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise DataError(f'{what} must only contain 0 and 1.')
    return arr.astype(np.uint8)


@dataclass(eq=False)
class BinaryDataset:
    """The n_x by p binary matrix observed for one level of the factor."""
    rows: np.ndarray
    label: str = '0'
    columns: tuple = ()

    def __post_init__(self):
        rows = np.asarray(self.rows)
        if rows.ndim != 2:
            raise DataError('Binary data must be a two dimensional matrix.')
        if rows.shape[0] < 1 or rows.shape[1] < 1:
            raise DataError('Binary data needs at least one row and column.')
        self.rows = _as_binary(rows, 'Binary data')
        self.label = str(self.label)
        if not self.columns:
            self.columns = tuple(f'z{r + 1}' for r in range(rows.shape[1]))
        self.columns = tuple(self.columns)
        if len(self.columns) != self.p:
            raise DataError('Column names do not match the data width.')

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def p(self):
        return self.rows.shape[1]

    def as_float(self):
        """Return the observations as a float matrix."""
        return self.rows.astype(float)

    def __str__(self):
        return f'group {self.label} ({self.n} x {self.p})'


@dataclass(eq=False)
class GroupedData:
    """Binary matrices for every level of the grouping factor."""
    groups: list

    def __post_init__(self):
        self.groups = list(self.groups)
        if len(self.groups) < 2:
            raise DataError('Grouped data needs at least two groups.')
        first = self.groups[0]
        for group in self.groups[1:]:
            if group.columns != first.columns:
                raise DataError(
                    f'Group {group.label} does not share the variable set.'
                )

    @property
    def p(self):
        return self.groups[0].p

    @property
    def q(self):
        return len(self.groups)

    @property
    def columns(self):
        return self.groups[0].columns

    @property
    def labels(self):
        return [group.label for group in self.groups]

    def __iter__(self):
        return iter(self.groups)

    def __getitem__(self, x):
        return self.groups[x]


@dataclass(eq=False)
class CanonicalParams:
    """Log-linear parameter of one Ising model: main effects and pairs."""
    main: np.ndarray
    inter: np.ndarray

    def __post_init__(self):
        self.main = np.asarray(self.main, dtype=float).reshape(-1)
        self.inter = np.asarray(self.inter, dtype=float).reshape(-1)
        if self.inter.size != n_pairs(self.main.size):
            raise ValueError(
                f'Expected {n_pairs(self.main.size)} interactions for '
                f'p={self.main.size}, got {self.inter.size}.'
            )

    @property
    def p(self):
        return self.main.size

    @classmethod
    def zeros(cls, p):
        return cls(np.zeros(p), np.zeros(n_pairs(p)))

    @classmethod
    def from_vector(cls, vector, p):
        """Build from the stacked [main, inter] vector."""
        vector = np.asarray(vector, dtype=float)
        return cls(vector[:p], vector[p:])

    def vector(self):
        return np.concatenate([self.main, self.inter])

    def matrix(self):
        """Return the symmetric matrix with main effects on the diagonal."""
        p = self.p
        rows, cols = pair_index(p)
        out = np.diag(self.main)
        out[rows, cols] = self.inter
        out[cols, rows] = self.inter
        return out

    def row(self, r):
        """Return [lambda_rr, lambda_r1, ..., lambda_r(r-1)] for node r."""
        return np.concatenate([[self.main[r]], self.inter[row_slice(r)]])

    def restrict(self, delta):
        """Return a copy with the interactions outside delta set to zero."""
        bits = delta.bits if isinstance(delta, EdgeIndicators) else delta
        return CanonicalParams(self.main.copy(), self.inter * bits)

    def is_finite(self):
        return bool(np.isfinite(self.main).all()
                    and np.isfinite(self.inter).all())


@dataclass(eq=False)
class MarginalCounts:
    """Observed counts y_rj of joint ones, y_rr on the diagonal."""
    y: np.ndarray
    n: int

    @property
    def p(self):
        return self.y.shape[0]

    def vector(self):
        """Return [y_11, ..., y_pp, y_21, y_31, y_32, ...]."""
        rows, cols = pair_index(self.p)
        return np.concatenate([np.diag(self.y), self.y[rows, cols]])


@dataclass(eq=False)
class EdgeIndicators:
    """Edge inclusion bits of one graph in canonical pair order."""
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits).reshape(-1)
        self.bits = _as_binary(bits, 'Edge indicators')
        self._p = nodes_from_pairs(self.bits.size)

    @property
    def p(self):
        return self._p

    @classmethod
    def empty(cls, p):
        return cls(np.zeros(n_pairs(p), dtype=np.uint8))

    @classmethod
    def from_edges(cls, p, edges):
        """Build from 1-based (r, j) labels given in either orientation."""
        bits = np.zeros(n_pairs(p), dtype=np.uint8)
        for r, j in edges:
            r, j = max(r, j) - 1, min(r, j) - 1
            if r == j or j < 0 or r >= p:
                raise ValueError(f'Invalid edge ({r + 1}, {j + 1}).')
            bits[r * (r - 1) // 2 + j] = 1
        return cls(bits)

    @property
    def count(self):
        return int(self.bits.sum())

    def edges(self):
        """Return the 1-based labels of the included edges."""
        labels = pair_labels(self.p)
        return [labels[k] for k in np.flatnonzero(self.bits)]

    def adjacency(self):
        rows, cols = pair_index(self.p)
        adj = np.zeros((self.p, self.p), dtype=np.uint8)
        adj[rows, cols] = self.bits
        adj[cols, rows] = self.bits
        return adj

    def __eq__(self, other):
        if not isinstance(other, EdgeIndicators):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())


@dataclass(eq=False)
class CouplingState:
    """Cross-group similarity, its indicators and edge-specific sparsity.

    ``omega`` is either one prior inclusion probability shared by all pairs
    of groups or a symmetric q x q matrix of per-pair probabilities.
    """
    theta: np.ndarray
    epsilon: np.ndarray
    nu: np.ndarray
    omega: object = 0.6
    alpha: float = 1.0
    beta: float = 2.0
    frozen: bool = field(default=False)

    def __post_init__(self):
        self.theta = np.array(self.theta, dtype=float)
        self.epsilon = np.array(self.epsilon, dtype=np.uint8)
        self.nu = np.array(self.nu, dtype=float).reshape(-1)
        if not np.isscalar(self.omega):
            self.omega = np.array(self.omega, dtype=float)

    @property
    def q(self):
        return self.theta.shape[0]

    @classmethod
    def initial(cls, q, m, a=1.0, b=3.0, omega=0.6, alpha=1.0, beta=2.0,
                theta0=0.5):
        """All groups related (epsilon = 1, theta = theta0), nu at E[q_rj]."""
        off = 1 - np.eye(q, dtype=np.uint8)
        return cls(
            theta=theta0 * off,
            epsilon=off,
            nu=np.full(m, logit(a / (a + b))),
            omega=omega,
            alpha=alpha,
            beta=beta,
        )

    @classmethod
    def independent(cls, q, m, prob):
        """Unrelated groups with a fixed Bernoulli(prob) edge prior."""
        return cls(
            theta=np.zeros((q, q)),
            epsilon=np.zeros((q, q), dtype=np.uint8),
            nu=np.full(m, logit(prob)),
            omega=0.0,
            frozen=True,
        )

    def omega_for(self, x, h):
        if np.isscalar(self.omega):
            return float(self.omega)
        return float(self.omega[x, h])

    def edge_probability(self):
        """Return q_rj = logistic(nu_rj)."""
        return 1.0 / (1.0 + np.exp(-self.nu))

    def check(self):
        """Raise ValueError unless theta > 0 exactly where epsilon = 1."""
        if not np.array_equal(self.theta, self.theta.T) \
                or not np.array_equal(self.epsilon, self.epsilon.T):
            raise ValueError('theta and epsilon must be symmetric.')
        off = ~np.eye(self.q, dtype=bool)
        on = self.epsilon.astype(bool) & off
        if (self.theta[on] <= 0).any() or (self.theta[~on] != 0).any():
            raise ValueError('theta must be positive exactly where '
                             'epsilon is one.')

    def copy(self):
        omega = self.omega if np.isscalar(self.omega) else self.omega.copy()
        return CouplingState(self.theta.copy(), self.epsilon.copy(),
                             self.nu.copy(), omega, self.alpha, self.beta,
                             self.frozen)
