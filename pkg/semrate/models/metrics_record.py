'''One row per simulated run (the metrics CSV, persisted)'''
from peewee import BooleanField, CharField, FloatField, IntegerField, IntegrityError

from semrate.models.base_model import BaseModel


class MetricsRecord(BaseModel):
    class Meta:
        table_name = 'run_metrics'
        indexes = ((('arrival_rate', 'epsilon', 'policy', 'v', 'seed'), True),)

    arrival_rate = FloatField()
    epsilon = FloatField()
    policy = CharField()
    v = FloatField()
    seed = CharField()  # u64 does not fit SQLite's signed INTEGER
    q_bar = FloatField()
    w_little = FloatField()
    w_direct = FloatField()
    aoi_bar = FloatField()
    err_rate = FloatField()
    z_final = FloatField()
    k_served = IntegerField()
    mean_n = FloatField()
    utilization = FloatField()
    stable = BooleanField()
    any_success = BooleanField()

    @classmethod
    def create_record(cls, arrival_rate, epsilon, policy, seed, metrics, replace=False):
        '''Stores the metrics of one run

        Args:
            arrival_rate(float): λ of the run
            epsilon(float): error cap
            policy(Policy): the policy, with its V
            seed(int): run seed
            metrics(RunMetrics): the run's metrics
            replace(bool): overwrite a stored row for the same run

        Returns:
            MetricsRecord: the stored row

        Raises:
            ValueError: When a row for the same (λ, ε, policy, V, seed) exists and
                ``replace`` is not set
        '''
        fields = dict(
            arrival_rate=arrival_rate,
            epsilon=epsilon,
            policy=policy.label,
            v=policy.v,
            seed=str(seed),
            q_bar=metrics.q_bar,
            w_little=metrics.w_little,
            w_direct=metrics.w_direct,
            aoi_bar=metrics.aoi_bar,
            err_rate=metrics.err_rate,
            z_final=metrics.z_final,
            k_served=metrics.k_served,
            mean_n=metrics.mean_n,
            utilization=metrics.utilization,
            stable=metrics.stable,
            any_success=metrics.any_success)
        if replace:
            return cls.get_by_id(cls.insert(**fields).on_conflict_replace().execute())
        try:
            return cls.create(**fields)
        except IntegrityError:
            raise ValueError('Run already stored')
