'''Run configuration

A run configuration is a YAML file. Each section is checked by a WTForms form
(fed with ``data=`` rather than request form data), then the cross-field rules
are applied and the result is turned into typed objects. Any failure raises
:class:`~semrate.exceptions.ConfigError` naming the field.

.. code-block:: yaml

    actions: [10, 15, 20]
    error_model:
      table: curves/reference.csv
    simulation:
      horizon: 1000000
    lambda: [0.02, 0.04, 0.06]
    epsilon: [0.2, 0.3]
    policy: [fixed:10, fixed:20, dpp-queue]
'''
import logging
import os
from dataclasses import dataclass

import yaml
from wtforms import BooleanField, FieldList, FloatField, Form, IntegerField, StringField
from wtforms.validators import AnyOf, Length, NumberRange, StopValidation, ValidationError

from semrate.controllers import Policy
from semrate.error_model import ActionSet, EstimatorMode, read_error_curve, synthetic_error_curve
from semrate.exceptions import ConfigError
from semrate.frontier import Objective, default_v_grid
from semrate.sim_engine import DEFAULT_BACKLOG_CAP, SimConfig

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1


def to_float(value):
    if value is None or isinstance(value, float):
        return value
    if isinstance(value, bool):
        raise ValueError('Not a valid float value.')
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValueError('Not a valid float value.')


class Required:
    '''Stops the chain with an error when no value was given (0 is a value)'''

    def __init__(self, message='This field is required.'):
        self.message = message

    def __call__(self, form, field):
        if field.process_errors:
            raise StopValidation()
        if field.data is None or field.data == '':
            field.errors[:] = []
            raise StopValidation(self.message)


class Skippable:
    '''Stops the chain silently when no value was given'''

    def __call__(self, form, field):
        if field.process_errors:
            raise StopValidation()
        if field.data is None:
            field.errors[:] = []
            raise StopValidation()


class OpenInterval:
    def __init__(self, low, high):
        self.low = low
        self.high = high

    def __call__(self, form, field):
        if field.data is None or not self.low < field.data < self.high:
            raise ValidationError('must lie in ({}, {}), got {}'.format(self.low, self.high, field.data))


class Positive:
    def __call__(self, form, field):
        if field.data is None or not field.data > 0:
            raise ValidationError('must be positive, got {}'.format(field.data))


class Integral:
    '''Rejects the non-integral numbers and booleans IntegerField would truncate'''

    def __call__(self, form, field):
        raw = field.object_data
        if isinstance(raw, bool) or (isinstance(raw, float) and not raw.is_integer()):
            raise ValidationError('must be an integer, got {!r}'.format(raw))


def policy_spec(form, field):
    try:
        Policy.parse(field.data)
    except ValueError as e:
        raise ValidationError(str(e))


class SimulationForm(Form):
    horizon = FloatField('simulation.horizon', [Required(), Positive()], filters=[to_float])
    warmup = FloatField('simulation.warmup', [Skippable(), NumberRange(min=0)], filters=[to_float])
    backlog_cap = IntegerField('simulation.backlog_cap', [Required(), Integral(), NumberRange(min=1)],
                               default=DEFAULT_BACKLOG_CAP)
    drain = BooleanField('simulation.drain', default=False)


class ErrorModelForm(Form):
    table = StringField('error_model.table')
    snr_tag = StringField('error_model.snr_tag')


class SyntheticCurveForm(Form):
    floor = FloatField('error_model.synthetic.floor', [Required(), NumberRange(min=0, max=1)], filters=[to_float])
    ceil = FloatField('error_model.synthetic.ceil', [Required(), NumberRange(min=0, max=1)], filters=[to_float])
    scale = FloatField('error_model.synthetic.scale', [Required(), Positive()], filters=[to_float])


class OutputForm(Form):
    dir = StringField('output.dir', default='.')
    db = StringField('output.db')


class RunForm(Form):
    '''Top-level keys of a run configuration'''
    actions = FieldList(IntegerField('actions', [Required(), Integral(), NumberRange(min=1)]), 'actions',
                        [Length(min=1, max=64, message='need between 1 and 64 actions')])
    lambdas = FieldList(FloatField('lambda', [Required(), Positive()], filters=[to_float]), 'lambda',
                        [Length(min=1, message='at least one arrival rate is required')])
    epsilons = FieldList(FloatField('epsilon', [Required(), OpenInterval(0, 1)], filters=[to_float]), 'epsilon',
                         [Length(min=1, message='at least one error cap is required')])
    policies = FieldList(StringField('policy', [Required(), policy_spec]), 'policy',
                         [Length(min=1, message='at least one policy is required')])
    v = FloatField('v', [Skippable(), NumberRange(min=0)], filters=[to_float])
    v_grid = FieldList(FloatField('v_grid', [Required(), NumberRange(min=0)], filters=[to_float]), 'v_grid')
    estimator = StringField('estimator', [AnyOf([m.value for m in EstimatorMode])], default='oracle')
    objective = StringField('objective', [AnyOf([o.value for o in Objective])], default='delay')
    seed = IntegerField('seed', [Required(), Integral(), NumberRange(min=0, max=MAX_SEED)], default=0)
    seeds = IntegerField('seeds', [Required(), Integral(), NumberRange(min=1)], default=5)


def _errors(form):
    '''Flattens form errors into "label: message" strings'''
    out = []
    for f in form:
        if isinstance(f, FieldList):
            for i, entry in enumerate(f.entries):
                out.extend('{}[{}]: {}'.format(entry.label.text, i, e) for e in entry.errors)
            out.extend('{}: {}'.format(f.label.text, e) for e in f.errors if isinstance(e, str))
        else:
            out.extend('{}: {}'.format(f.label.text, e) for e in f.errors)
    return out


def _validated(form_class, data):
    if data is not None and not isinstance(data, dict):
        raise ConfigError(form_class.__name__, 'expected a mapping, got {!r}'.format(data))
    form = form_class(data=data or {})
    if not form.validate():
        messages = _errors(form)
        field, message = messages[0].split(': ', 1)
        if len(messages) > 1:
            message += ' (and {} more)'.format(len(messages) - 1)
        raise ConfigError(field, message)
    return form


def _as_list(raw, singular, plural):
    value = raw.get(plural, raw.get(singular))
    if value is None:
        return []
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass(frozen=True)
class RunConfig:
    '''A validated run configuration'''
    actions: ActionSet
    curve: object
    lambdas: tuple
    epsilons: tuple
    policies: tuple
    v: float
    v_grid: tuple
    estimator: EstimatorMode
    objective: Objective
    horizon: float
    warmup: float
    backlog_cap: int
    drain: bool
    master_seed: int
    n_seeds: int
    out_dir: str
    db: str

    def sim_config(self, arrival_rate, seed=None):
        return SimConfig(arrival_rate, self.horizon, self.warmup,
                         self.master_seed if seed is None else seed, self.backlog_cap, self.drain)

    def single(self):
        '''(λ, ε, policy) of a single-run configuration

        Raises:
            ConfigError: When more than one value is configured for any of them
        '''
        for name, values in (('lambda', self.lambdas), ('epsilon', self.epsilons), ('policy', self.policies)):
            if len(values) != 1:
                raise ConfigError(name, 'simulate needs exactly one value, got {}'.format(len(values)))
        return self.lambdas[0], self.epsilons[0], self.policies[0]


def parse_config(raw, base_dir='.'):
    '''Validates a parsed YAML mapping

    Args:
        raw(dict): the document
        base_dir(str): directory relative table paths are resolved against

    Returns:
        RunConfig: typed configuration

    Raises:
        ConfigError: On the first failing field
    '''
    if not isinstance(raw, dict):
        raise ConfigError('config', 'top level must be a mapping')
    run = _validated(RunForm, {
        'actions': _as_list(raw, 'actions', 'actions'),
        'lambdas': _as_list(raw, 'lambda', 'lambdas'),
        'epsilons': _as_list(raw, 'epsilon', 'epsilons'),
        'policies': _as_list(raw, 'policy', 'policies'),
        'v': raw.get('v'),
        'v_grid': list(raw.get('v_grid') or []),
        'estimator': raw.get('estimator', 'oracle'),
        'objective': raw.get('objective', 'delay'),
        'seed': raw.get('seed', 0),
        'seeds': raw.get('seeds', 5),
    })
    sim = _validated(SimulationForm, raw.get('simulation'))
    em = _validated(ErrorModelForm, raw.get('error_model'))
    out = _validated(OutputForm, raw.get('output'))

    actions = ActionSet(tuple(run.actions.data))
    horizon = sim.horizon.data
    warmup = sim.warmup.data
    if warmup is None:
        warmup = 0.1 * horizon
    if not warmup < horizon:
        raise ConfigError('simulation.warmup', 'must be smaller than the horizon ({})'.format(horizon))

    synthetic = (raw.get('error_model') or {}).get('synthetic')
    table = em.table.data
    snr_tag = em.snr_tag.data or None
    if bool(table) == bool(synthetic):
        raise ConfigError('error_model', 'give exactly one of table or synthetic')
    if table:
        path = table if os.path.isabs(table) else os.path.join(base_dir, table)
        if not os.path.isfile(path):
            raise ConfigError('error_model.table', 'file not found: {}'.format(path))
        curve = read_error_curve(path, actions, snr_tag=snr_tag)
    else:
        params = _validated(SyntheticCurveForm, synthetic)
        curve = synthetic_error_curve(actions, params.floor.data, params.ceil.data, params.scale.data,
                                      snr_tag=snr_tag or 'synthetic')

    estimator = EstimatorMode(run.estimator.data)
    v = run.v.data if run.v.data is not None else 0.0
    policies = []
    for i, spec in enumerate(run.policies.data):
        policy = Policy.parse(spec, v=v, estimator=estimator)
        try:
            policy.check_actions(actions)
        except ValueError as e:
            raise ConfigError('policy[{}]'.format(i), str(e))
        policies.append(policy)

    v_grid = tuple(run.v_grid.data) or tuple(default_v_grid())
    if list(v_grid) != sorted(v_grid):
        raise ConfigError('v_grid', 'must be ascending')
    lambdas = tuple(run.lambdas.data)
    if list(lambdas) != sorted(lambdas):
        raise ConfigError('lambda', 'arrival rates must be ascending')

    return RunConfig(
        actions=actions,
        curve=curve,
        lambdas=lambdas,
        epsilons=tuple(sorted(run.epsilons.data)),
        policies=tuple(policies),
        v=v,
        v_grid=v_grid,
        estimator=estimator,
        objective=Objective(run.objective.data),
        horizon=horizon,
        warmup=warmup,
        backlog_cap=sim.backlog_cap.data,
        drain=bool(sim.drain.data),
        master_seed=run.seed.data,
        n_seeds=run.seeds.data,
        out_dir=out.dir.data or '.',
        db=out.db.data or None,
    )


def load_config(path):
    '''Reads and validates the YAML configuration at ``path``

    Raises:
        ConfigError: When the file cannot be read or parsed, or fails validation
    '''
    try:
        with open(path, encoding='utf-8') as fin:
            raw = yaml.safe_load(fin)
    except OSError as e:
        raise ConfigError('config', 'cannot read {}: {}'.format(path, e.strerror))
    except yaml.YAMLError as e:
        raise ConfigError('config', 'cannot parse {}: {}'.format(path, e))
    cfg = parse_config(raw, base_dir=os.path.dirname(os.path.abspath(path)))
    logger.info('Loaded %s: %d lambda x %d epsilon x %d policies', path, len(cfg.lambdas),
                len(cfg.epsilons), len(cfg.policies))
    return cfg


EXAMPLE_CONFIG = '''\
# semrate run configuration (YAML)

# Latent dimensions N (channel uses per update), strictly increasing.
actions: [10, 15, 20]

# p_e(N): either a CSV table with header n,p_e (optional snr column + snr_tag)
# or a synthetic curve p_e(N) = floor + (ceil - floor) * exp(-N / scale).
error_model:
  synthetic: {floor: 0.05, ceil: 0.8, scale: 6.0}
  # table: curves/multi_snr.csv
  # snr_tag: "10"

simulation:
  horizon: 1000000        # simulated time units
  # warmup: 100000        # default: 10% of horizon
  backlog_cap: 1000000    # runs halt (stable=false) above this backlog
  drain: false            # serve remaining updates after the horizon

# Scalars or ascending lists. simulate needs exactly one of each; for a
# sweep or frontier grid use lists instead, e.g.
#   lambda: [0.02, 0.04, 0.06]
#   epsilon: [0.2, 0.25, 0.3]
#   policy: [fixed:10, fixed:15, fixed:20, dpp-queue]
lambda: 0.04
epsilon: 0.25
policy: dpp-queue         # fixed:<n> | dpp-queue | dpp-aoi

v: 10.0                   # control weight for simulate
# v_grid: [0, 0.1, 1, 10, 100]   # default: 0 plus 17 log-spaced points on [1e-2, 1e6]
estimator: oracle         # oracle | empirical
objective: delay          # delay | aoi (what sweep/frontier minimize over V)

seed: 0                   # master seed
seeds: 5                  # replications per grid point

output:
  dir: out
  # db: out/results.sqlite
'''
