"""Seeding, parallel sample evaluation and summary statistics.

Every Monte-Carlo sample ``index`` of a run with base seed ``seed`` draws its
random numbers from ``SeedSequence([seed, index])`` fed to a Philox
(counter-based) bit generator. A sample therefore depends only on
``(seed, index)``, never on which worker evaluated it, and the results are
reassembled in index order before any reduction.
"""
import logging
from dataclasses import dataclass, replace
from multiprocessing import Pool

import numpy as np

logger = logging.getLogger(__name__)

SEED_MAX = 2**64 - 1
CHUNKS_PER_WORKER = 4


def seed_sequence(seed):
    """Normalize an int, a sequence of ints or a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (int, np.integer)):
        entropy = int(seed)
        if not 0 <= entropy <= SEED_MAX:
            raise ValueError(f'seed must be an unsigned 64-bit integer, got {seed}')
        return np.random.SeedSequence(entropy)
    return np.random.SeedSequence([int(part) for part in seed])


def philox_streams(seed, count):
    """Return ``count`` independent Philox generators derived from ``seed``."""
    children = seed_sequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def sample_seed(base_seed, index):
    return (int(base_seed), int(index))


def _run_chunk(task):
    sample_fn, base_seed, start, stop = task
    return [np.asarray(sample_fn(sample_seed(base_seed, index))) for index in range(start, stop)]


def run_samples(sample_fn, n_samples, base_seed, workers=1):
    """Evaluate ``sample_fn(seed)`` for ``n_samples`` consecutive seeds.

    ``sample_fn`` must be picklable when ``workers > 1`` (a module-level
    function or a ``functools.partial`` of one). The returned array is indexed
    by sample number whatever the worker count.
    """
    if n_samples < 1:
        raise ValueError('n_samples must be positive')
    if workers <= 1 or n_samples < 2 * workers:
        rows = _run_chunk((sample_fn, base_seed, 0, n_samples))
    else:
        edges = np.linspace(0, n_samples, workers * CHUNKS_PER_WORKER + 1).astype(int)
        tasks = [(sample_fn, base_seed, int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        logger.debug('running %d samples in %d chunks on %d workers', n_samples, len(tasks), workers)
        with Pool(processes=workers) as pool:
            chunks = pool.map(_run_chunk, tasks)
        rows = [row for chunk in chunks for row in chunk]
    return np.stack(rows)


@dataclass(frozen=True)
class SampleStats:
    mean: np.ndarray
    variance: np.ndarray
    se: np.ndarray
    variance_se: np.ndarray
    count: int

    @classmethod
    def from_samples(cls, values):
        values = np.asarray(values)
        count = values.shape[0]
        if count < 2:
            raise ValueError('need at least two samples for a variance')
        mean = values.mean(axis=0)
        centered = values - mean
        if np.iscomplexobj(centered):
            second = np.mean(np.abs(centered) ** 2, axis=0)
            fourth = np.mean(np.abs(centered) ** 4, axis=0)
        else:
            second = np.mean(centered**2, axis=0)
            fourth = np.mean(centered**4, axis=0)
        variance = second * count / (count - 1)
        return cls(
            mean=mean,
            variance=variance,
            se=np.sqrt(variance / count),
            variance_se=np.sqrt(np.maximum(fourth - second**2, 0.0) / count),
            count=count,
        )

    def shifted(self, offset):
        return replace(self, mean=self.mean + offset)


def within_envelope(estimate, target, se, n_se=3.0, slack=0.0):
    """True where ``|estimate - target| <= n_se * se + slack`` everywhere."""
    deviation = np.abs(np.asarray(estimate) - np.asarray(target))
    return bool(np.all(deviation <= n_se * np.asarray(se) + slack))
