"""Replicated simulation studies scored against the true graphs."""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd
from django.conf import settings

from core.exceptions import ConfigError
from core.ising import exact_limit
from graphsel.metrics import f1, mcc
from graphsel.summaries import ppi, select_graphs
from sampler.config import ENGINES, EXACT_ENGINES, RunConfig
from sampler.runner import run_chain

from .scenarios import build_scenario, simulate_dataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StudyConfig:
    kinds: tuple = ('A',)
    methods: tuple = ('fb', 'ab')
    replicates: int = 10
    p: int = 10
    q: int = 4
    n_per_group: int = 100
    iterations: int = 10000
    burn_in: int = 2000
    thin: int = 10
    seed: int = 0
    cutoff: float = 0.5
    workers: int = 1
    main_effect: object = None
    interaction: object = None
    gibbs_burn_in: object = None
    gibbs_thin: object = None
    run: dict = field(default_factory=dict)

    def check(self):
        if self.replicates < 2:
            raise ConfigError('Standard errors need at least two replicates.')
        unknown = set(self.methods) - set(ENGINES)
        if unknown:
            raise ConfigError(f'Unknown methods {sorted(unknown)}.')
        if self.p > exact_limit() and \
                set(self.methods) & set(EXACT_ENGINES):
            raise ConfigError(
                f'fb and fbs support at most {exact_limit()} variables, '
                f'got p={self.p}.'
            )

    def run_config(self, method):
        return RunConfig.build(
            **{**self.run, 'engine': method, 'iterations': self.iterations,
               'burn_in': self.burn_in, 'thin': self.thin,
               'seed': self.seed, 'log_every': 0}
        )

    def as_dict(self):
        values = asdict(self)
        values['kinds'] = list(self.kinds)
        values['methods'] = list(self.methods)
        return values


@dataclass(eq=False)
class StudyReport:
    """Per-replicate scores and their per-scenario, per-method summary."""
    records: pd.DataFrame
    table: pd.DataFrame
    replicates: int
    config: dict = field(default_factory=dict)

    def score(self, kind, method, metric='mcc'):
        """Return (mean, standard error) of a metric."""
        row = self.table.loc[(kind, method)]
        return float(row[f'{metric}_mean']), float(row[f'{metric}_se'])


def replicate_seeds(seed, kinds, replicates):
    """Independent seed sequences for every (kind, replicate) pair."""
    children = np.random.SeedSequence(seed).spawn(len(kinds) * replicates)
    return {
        (kind, i): children[k * replicates + i]
        for k, kind in enumerate(kinds)
        for i in range(replicates)
    }


def run_replicate(config, kind, replicate, seed_seq):
    """Simulate one data set, fit every method and score the selection."""
    scenario_seq, data_seq, fit_seq = seed_seq.spawn(3)
    scenario = build_scenario(
        kind, config.p, config.q, np.random.default_rng(scenario_seq),
        config.n_per_group, main_effect=config.main_effect,
        interaction=config.interaction,
    )
    data = simulate_dataset(scenario, burn_in=config.gibbs_burn_in,
                            thin=config.gibbs_thin, seed=data_seq)
    records = []
    for method, method_seq in zip(config.methods,
                                  fit_seq.spawn(len(config.methods))):
        started = time.perf_counter()
        chain = run_chain(data, config.run_config(method),
                          np.random.default_rng(method_seq))
        selected = select_graphs(ppi(chain), config.cutoff)
        records.append({
            'scenario': kind,
            'method': method,
            'replicate': replicate,
            'mcc': mcc(scenario.graphs, selected),
            'f1': f1(scenario.graphs, selected),
            'seconds': time.perf_counter() - started,
        })
        logger.info('Scenario %s replicate %d %s: MCC %.3f F1 %.3f',
                    kind, replicate, method, records[-1]['mcc'],
                    records[-1]['f1'])
    return records


def _run_job(args):
    return run_replicate(*args)


def summarize_records(records):
    """Means and standard errors of MCC, F1 and runtime."""
    grouped = records.groupby(['scenario', 'method'], sort=False)
    table = grouped.agg(
        mcc_mean=('mcc', 'mean'),
        mcc_se=('mcc', 'sem'),
        f1_mean=('f1', 'mean'),
        f1_se=('f1', 'sem'),
        seconds=('seconds', 'mean'),
        replicates=('replicate', 'count'),
    )
    return table


def replicate_study(config, workers=None):
    """Run every scenario and method over ``config.replicates`` data sets."""
    config.check()
    workers = workers or config.workers or settings.MULTISING['WORKERS']
    seeds = replicate_seeds(config.seed, config.kinds, config.replicates)
    jobs = [
        (config, kind, i, seeds[kind, i])
        for kind in config.kinds
        for i in range(config.replicates)
    ]
    logger.info('Study with %d replicates of %s for %s on %d workers',
                config.replicates, list(config.kinds), list(config.methods),
                workers)
    if workers <= 1:
        results = [_run_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs))
    records = pd.DataFrame([row for rows in results for row in rows])
    return StudyReport(records, summarize_records(records),
                       config.replicates, config.as_dict())
