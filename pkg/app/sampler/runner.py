"""Engine dispatch and independent seeded chains."""
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from django.conf import settings

from core.exceptions import ConfigError

from .ab import run_ab_chain
from .config import ENGINES
from .fb import run_fb_chain

logger = logging.getLogger(__name__)

RUNNERS = {
    'fb': run_fb_chain,
    'fbs': run_fb_chain,
    'ab': run_ab_chain,
    'abs': run_ab_chain,
}


def run_chain(data, config, rng=None):
    """Run the engine named by ``config.engine`` on grouped data."""
    if config.engine not in ENGINES:
        raise ConfigError(f'Unknown engine {config.engine!r}.')
    return RUNNERS[config.engine](data, config, rng)


def chain_seeds(seed, chains):
    """Independent child seed sequences, one per chain."""
    return np.random.SeedSequence(seed).spawn(chains)


def _run_seeded(args):
    data, config, seed_seq = args
    return run_chain(data, config, np.random.default_rng(seed_seq))


def run_chains(data, config, chains=1, workers=None):
    """Run ``chains`` independent chains, in parallel when workers > 1.

    A single chain uses ``config.seed`` directly so its output matches a
    plain ``run_chain`` call.
    """
    if chains < 1:
        raise ConfigError('At least one chain is required.')
    if chains == 1:
        return [run_chain(data, config)]
    workers = workers or settings.MULTISING['WORKERS']
    jobs = [(data, config, seq) for seq in chain_seeds(config.seed, chains)]
    logger.info('Running %d %s chains on %d workers', chains, config.engine,
                workers)
    if workers <= 1:
        return [_run_seeded(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_seeded, jobs))
