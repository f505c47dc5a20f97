'''Action set and semantic error model

The latent dimension N of an update sets both its service time and the
probability p_e(N) that the receiver's classification of it is wrong. This
module holds the action set, the p_e(N) curve (loaded from a table or generated
synthetically), Bernoulli error sampling and the estimator controllers read
p̂_e(N) from.
'''
import csv
import io
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from semrate.exceptions import ConfigError

logger = logging.getLogger(__name__)

MAX_ACTIONS = 64


@dataclass(frozen=True)
class ActionSet:
    '''Ordered latent dimensions N_1 < ... < N_M (complex channel uses per update)'''
    latent_dims: tuple

    def __post_init__(self):
        dims = tuple(self.latent_dims)
        if not dims:
            raise ConfigError('actions', 'action set must not be empty')
        if len(dims) > MAX_ACTIONS:
            raise ConfigError('actions', 'at most {} actions are supported'.format(MAX_ACTIONS))
        for n in dims:
            if isinstance(n, bool) or int(n) != n or n < 1:
                raise ConfigError('actions', 'latent dimensions must be integers >= 1, got {!r}'.format(n))
        dims = tuple(int(n) for n in dims)
        if any(a >= b for a, b in zip(dims, dims[1:])):
            raise ConfigError('actions', 'latent dimensions must be strictly increasing')
        object.__setattr__(self, 'latent_dims', dims)

    def __iter__(self):
        return iter(self.latent_dims)

    def __len__(self):
        return len(self.latent_dims)

    def __contains__(self, n):
        return n in self.latent_dims

    def index(self, n):
        '''Position of ``n`` in the set

        Raises:
            ValueError: When ``n`` is not an action
        '''
        try:
            return self.latent_dims.index(n)
        except ValueError:
            raise ValueError('latent dimension {!r} is not in the action set {}'.format(n, self.latent_dims))

    @property
    def smallest(self):
        return self.latent_dims[0]


@dataclass(frozen=True)
class ErrorCurve:
    '''p_e(N) over an action set at one operating SNR

    ``snr_tag`` only labels the curve; it takes no part in the dynamics.
    '''
    actions: ActionSet
    probabilities: tuple
    snr_tag: str = ''

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probabilities)
        if len(probs) != len(self.actions):
            raise ConfigError('error_model', 'curve needs exactly one value per action')
        for n, p in zip(self.actions, probs):
            if not 0.0 <= p <= 1.0:
                raise ConfigError('error_model', 'p_e({}) = {} is outside [0, 1]'.format(n, p))
        dims = self.actions.latent_dims
        for i in range(1, len(probs)):
            if probs[i] > probs[i - 1]:
                raise ConfigError('error_model',
                                  'curve must be non-increasing in N: p_e({}) = {} < p_e({}) = {}'.format(
                                      dims[i - 1], probs[i - 1], dims[i], probs[i]))
        object.__setattr__(self, 'probabilities', probs)

    @property
    def entries(self):
        return dict(zip(self.actions, self.probabilities))

    def p_e(self, n):
        return self.probabilities[self.actions.index(n)]


def load_error_curve(source, actions, snr_tag=None):
    '''Parses an error-curve table

    The table is CSV with header ``n,p_e`` and one row per action. An optional
    ``snr`` column holds several curves in one file; ``snr_tag`` then picks one.

    Args:
        source(str or file): CSV text or an open text stream
        actions(ActionSet): the action set the curve must cover
        snr_tag(str): curve selector for multi-SNR tables

    Returns:
        ErrorCurve: the validated curve

    Raises:
        ConfigError: On a missing or duplicate action row, a row for an N outside
            the action set, an unparseable or out-of-range p_e, or a curve that
            increases with N
    '''
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.DictReader(stream)
    header = [h.strip() for h in (reader.fieldnames or [])]
    if 'n' not in header or 'p_e' not in header:
        raise ConfigError('error_model.table', 'header must contain the columns n,p_e')
    reader.fieldnames = header

    rows = [{k: (v or '').strip() for k, v in row.items() if k is not None} for row in reader]
    if 'snr' in header:
        tags = sorted({row['snr'] for row in rows})
        if snr_tag is None:
            if len(tags) > 1:
                raise ConfigError('error_model.snr_tag', 'table holds curves for {} - pick one'.format(', '.join(tags)))
            snr_tag = tags[0] if tags else ''
        rows = [row for row in rows if row['snr'] == str(snr_tag)]
        if not rows:
            raise ConfigError('error_model.snr_tag', 'no rows for snr {!r}'.format(snr_tag))

    values = {}
    for line, row in enumerate(rows, start=2):
        try:
            n = int(row['n'])
            p = float(row['p_e'])
        except ValueError:
            raise ConfigError('error_model.table', 'row {}: cannot parse {!r}'.format(line, row))
        if n not in actions:
            raise ConfigError('error_model.table', 'row {}: N={} is not in the action set'.format(line, n))
        if n in values:
            raise ConfigError('error_model.table', 'row {}: duplicate row for N={}'.format(line, n))
        values[n] = p

    missing = [n for n in actions if n not in values]
    if missing:
        raise ConfigError('error_model.table', 'missing rows for N={}'.format(missing))
    curve = ErrorCurve(actions, tuple(values[n] for n in actions), snr_tag=str(snr_tag or ''))
    logger.debug('Loaded error curve %s (snr %r)', curve.entries, curve.snr_tag)
    return curve


def read_error_curve(path, actions, snr_tag=None):
    '''Loads an error-curve table from ``path`` (UTF-8)'''
    with open(path, encoding='utf-8', newline='') as fin:
        return load_error_curve(fin, actions, snr_tag=snr_tag)


def synthetic_error_curve(actions, floor, ceil, scale, snr_tag='synthetic'):
    '''Saturating curve p_e(N) = floor + (ceil - floor) * exp(-N / scale)

    Raises:
        ConfigError: Unless 0 <= floor < ceil <= 1 and scale > 0
    '''
    if not 0.0 <= floor < ceil <= 1.0:
        raise ConfigError('error_model.synthetic', 'need 0 <= floor < ceil <= 1, got floor={} ceil={}'.format(floor, ceil))
    if not scale > 0:
        raise ConfigError('error_model.synthetic.scale', 'scale must be positive, got {}'.format(scale))
    dims = np.asarray(actions.latent_dims, dtype=float)
    probs = floor + (ceil - floor) * np.exp(-dims / scale)
    return ErrorCurve(actions, tuple(float(p) for p in probs), snr_tag=snr_tag)


def feasible_fixed_actions(curve, epsilon):
    '''Actions whose error probability alone satisfies the cap'''
    return [n for n, p in zip(curve.actions, curve.probabilities) if p <= epsilon]


def sample_error(curve, n, rng):
    '''Draws E ~ Bernoulli(p_e(n)) from ``rng`` (a numpy Generator)'''
    p = curve.p_e(n)
    return int(rng.random() < p)


class EstimatorMode(Enum):
    ORACLE = 'oracle'
    EMPIRICAL = 'empirical'


class ErrorEstimator:
    '''Serves p̂_e(N) to controllers

    Oracle mode passes the curve through. Empirical mode counts trials and
    errors per action and returns the add-one smoothed rate
    (errors + 1) / (trials + 2), which never reaches 0 or 1.

    One estimator belongs to one simulation run.
    '''

    def __init__(self, mode, actions):
        self.mode = EstimatorMode(mode)
        self.actions = actions
        self.trials = np.zeros(len(actions), dtype=np.int64)
        self.errors = np.zeros(len(actions), dtype=np.int64)

    def estimate(self, curve, n):
        '''p̂_e(n)

        Raises:
            ValueError: When ``n`` is not an action
        '''
        i = self.actions.index(n)
        if self.mode is EstimatorMode.ORACLE:
            return curve.probabilities[i]
        return (int(self.errors[i]) + 1) / (int(self.trials[i]) + 2)

    def estimates(self, curve):
        if self.mode is EstimatorMode.ORACLE:
            return curve.probabilities
        return tuple(float(x) for x in (self.errors + 1) / (self.trials + 2))

    def record_outcome(self, n, e):
        '''Counts one served update; no effect in oracle mode

        Raises:
            ValueError: When ``n`` is not an action or ``e`` is not 0/1
        '''
        i = self.actions.index(n)
        if e not in (0, 1):
            raise ValueError('error indicator must be 0 or 1, got {!r}'.format(e))
        if self.mode is EstimatorMode.ORACLE:
            return self
        self.trials[i] += 1
        self.errors[i] += e
        return self
