'''One row per frontier point or load-curve entry'''
from peewee import BooleanField, CharField, FloatField, IntegrityError

from semrate.models.base_model import BaseModel


class FrontierRecord(BaseModel):
    class Meta:
        table_name = 'frontier_point'
        indexes = ((('arrival_rate', 'epsilon', 'policy', 'objective_kind', 'v'), True),)

    arrival_rate = FloatField()
    epsilon = FloatField()
    policy = CharField()
    objective_kind = CharField()
    v = FloatField()
    objective = FloatField(null=True)
    err_rate = FloatField(null=True)
    err_rate_std = FloatField(null=True)
    feasible = BooleanField()
    stable = BooleanField()
    selected = BooleanField(default=False)

    @classmethod
    def create_record(cls, row, objective_kind, replace=False):
        '''Stores one frontier CSV row

        With ``replace`` an existing row for the same point is overwritten.

        Raises:
            ValueError: When the (λ, ε, policy, objective, V) point exists and
                ``replace`` is not set
        '''
        fields = dict(
            arrival_rate=row['lambda'],
            epsilon=row['epsilon'],
            policy=row['policy'],
            objective_kind=objective_kind,
            v=row['v'],
            objective=row['objective'],
            err_rate=row['err_rate'],
            err_rate_std=row['err_rate_std'],
            feasible=row['feasible'],
            stable=row['stable'],
            selected=row.get('selected', False))
        if replace:
            return cls.get_by_id(cls.insert(**fields).on_conflict_replace().execute())
        try:
            return cls.create(**fields)
        except IntegrityError:
            raise ValueError('Frontier point already stored')
