"""Materialized run configuration shared by both engines."""
from dataclasses import asdict, dataclass

import numpy as np
from django.conf import settings

from core.models import CouplingState
from core.priors import MrfHyper, SpikeSlabHyper, default_dy_hyper

from .coupling import NuProposal, ThetaProposal

ENGINES = ('fb', 'ab', 'fbs', 'abs')
SEPARATE_ENGINES = ('fbs', 'abs')
EXACT_ENGINES = ('fb', 'fbs')


@dataclass(frozen=True)
class RunConfig:
    engine: str
    iterations: int
    burn_in: int
    thin: int
    seed: int
    g: float
    alpha: float
    beta: float
    omega: float
    omega_adjacent: object
    a: float
    b: float
    sigma: float
    theta_proposal_alpha: float
    theta_proposal_beta: float
    nu_proposal_a: float
    nu_proposal_b: float
    coupling_likelihood: str
    scan: str
    cutoff: float
    fdr_bound: float
    sweeps: int
    tune_step_size: bool
    laplace_cache_size: int
    laplace_failure_rate: float
    keep_lambda: bool
    log_every: int
    rho: object = None
    gamma: object = None
    edge_prob: object = None

    @classmethod
    def build(cls, **overrides):
        """Fill every field not given from ``settings.MULTISING['RUN']``."""
        values = dict(settings.MULTISING['RUN'])
        values.update(
            {key: val for key, val in overrides.items() if val is not None}
        )
        return cls(**values)

    @property
    def separate(self):
        return self.engine in SEPARATE_ENGINES

    @property
    def exact(self):
        return self.engine in EXACT_ENGINES

    def spike_slab(self, p):
        default = SpikeSlabHyper.default(p)
        return SpikeSlabHyper(
            rho=default.rho if self.rho is None else self.rho,
            gamma=default.gamma if self.gamma is None else self.gamma,
        )

    def dy_hyper(self, p):
        return default_dy_hyper(p, self.g)

    def mrf_hyper(self):
        return MrfHyper(self.a, self.b)

    def theta_proposal(self):
        return ThetaProposal(self.theta_proposal_alpha,
                             self.theta_proposal_beta)

    def nu_proposal(self):
        return NuProposal(self.nu_proposal_a, self.nu_proposal_b)

    def separate_edge_prob(self, p):
        """Bernoulli edge prior of the uncoupled engines."""
        if self.edge_prob is not None:
            return self.edge_prob
        return 0.2 if p <= 10 else 0.1

    def omega_matrix(self, q):
        """Return omega as a q x q matrix, raised between adjacent levels."""
        omega = np.full((q, q), float(self.omega))
        if self.omega_adjacent is not None:
            idx = np.arange(q - 1)
            omega[idx, idx + 1] = self.omega_adjacent
            omega[idx + 1, idx] = self.omega_adjacent
        np.fill_diagonal(omega, 0.0)
        return omega

    def initial_coupling(self, q, m, p):
        if self.separate:
            return CouplingState.independent(q, m, self.separate_edge_prob(p))
        omega = self.omega if self.omega_adjacent is None \
            else self.omega_matrix(q)
        return CouplingState.initial(q, m, a=self.a, b=self.b, omega=omega,
                                     alpha=self.alpha, beta=self.beta)

    def as_dict(self):
        return asdict(self)
