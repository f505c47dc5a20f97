'''Latent-dimension selection rules

Three policies pick N_k at each service start:

    - ``fixed:<n>``  always n
    - ``dpp-queue``  argmin over N of  Q_k*N + V*Z_k*p̂_e(N)
    - ``dpp-aoi``    argmin over N of  Δ_k*N + N²/2 + V*Z_k*p̂_e(N)

Both drift-plus-penalty rules come from the Lyapunov function
L = Q²/2 + Z²/2; only the resulting myopic rules are implemented. Costs are
evaluated exhaustively over the action set and ties go to the smallest N.
'''
from dataclasses import dataclass
from enum import Enum

from semrate.error_model import EstimatorMode


class PolicyKind(Enum):
    FIXED = 'fixed'
    DPP_QUEUE = 'dpp-queue'
    DPP_AOI = 'dpp-aoi'


@dataclass(frozen=True)
class Policy:
    '''A selection rule with its control weight V and estimator mode'''
    kind: PolicyKind
    v: float = 0.0
    fixed_n: int = None
    estimator_mode: EstimatorMode = EstimatorMode.ORACLE

    def __post_init__(self):
        object.__setattr__(self, 'kind', PolicyKind(self.kind))
        object.__setattr__(self, 'estimator_mode', EstimatorMode(self.estimator_mode))
        if not self.v >= 0:
            raise ValueError('control weight V must be >= 0, got {}'.format(self.v))
        if self.kind is PolicyKind.FIXED:
            if self.fixed_n is None or int(self.fixed_n) != self.fixed_n or self.fixed_n < 1:
                raise ValueError('fixed policy needs a latent dimension >= 1, got {!r}'.format(self.fixed_n))
            object.__setattr__(self, 'fixed_n', int(self.fixed_n))
        object.__setattr__(self, 'v', float(self.v))

    @classmethod
    def parse(cls, spec, v=0.0, estimator='oracle'):
        '''Builds a policy from its configuration spelling

        Example:

        .. code-block:: python

            Policy.parse('fixed:10')
            Policy.parse('dpp-queue', v=100.0, estimator='empirical')

        Raises:
            ValueError: When ``spec`` is not ``fixed:<n>``, ``dpp-queue`` or ``dpp-aoi``
        '''
        spec = str(spec).strip()
        if spec.startswith('fixed:'):
            try:
                n = int(spec.split(':', 1)[1])
            except ValueError:
                raise ValueError('cannot parse latent dimension in {!r}'.format(spec))
            return cls(PolicyKind.FIXED, v=v, fixed_n=n, estimator_mode=estimator)
        try:
            kind = PolicyKind(spec)
        except ValueError:
            raise ValueError('unknown policy {!r}; expected fixed:<n>, dpp-queue or dpp-aoi'.format(spec))
        if kind is PolicyKind.FIXED:
            raise ValueError('fixed policy needs a latent dimension, e.g. fixed:10')
        return cls(kind, v=v, estimator_mode=estimator)

    @property
    def label(self):
        if self.kind is PolicyKind.FIXED:
            return 'fixed:{}'.format(self.fixed_n)
        return self.kind.value

    @property
    def is_dpp(self):
        return self.kind is not PolicyKind.FIXED

    def with_v(self, v):
        return Policy(self.kind, v=v, fixed_n=self.fixed_n, estimator_mode=self.estimator_mode)

    def check_actions(self, actions):
        '''Raises ValueError when a fixed policy's N is not an action'''
        if self.kind is PolicyKind.FIXED and self.fixed_n not in actions:
            raise ValueError('fixed policy N={} is not in the action set {}'.format(
                self.fixed_n, actions.latent_dims))


@dataclass(frozen=True)
class DecisionContext:
    '''State seen by the controller at a service start

    ``q_k`` counts the update entering service and ``estimates`` maps each N
    to p̂_e(N). ``delta_k`` is the age at t_k; when the service follows a
    departure at the same instant it is the age after that departure's reset.
    '''
    q_k: int
    z_k: float
    delta_k: float
    estimates: dict

    def __post_init__(self):
        if self.q_k < 1:
            raise ValueError('a service decision needs q_k >= 1, got {}'.format(self.q_k))
        if self.z_k < 0 or self.delta_k < 0:
            raise ValueError('z_k and delta_k must be non-negative')


def queue_aware_cost(n, ctx, v):
    return ctx.q_k * n + v * ctx.z_k * ctx.estimates[n]


def aoi_aware_cost(n, ctx, v):
    # Δ·N + N²/2 is the age area accumulated over a service of length N
    return ctx.delta_k * n + n * n / 2 + v * ctx.z_k * ctx.estimates[n]


COSTS = {
    PolicyKind.DPP_QUEUE: queue_aware_cost,
    PolicyKind.DPP_AOI: aoi_aware_cost,
}


def select(policy, ctx, actions):
    '''Chooses N_k for the update entering service

    Args:
        policy(Policy): the selection rule
        ctx(DecisionContext): backlog, virtual queue, age and estimates at t_k
        actions(ActionSet): candidate latent dimensions, ascending

    Returns:
        int: the chosen latent dimension; for DPP rules the first (smallest)
        minimizer of the cost
    '''
    if policy.kind is PolicyKind.FIXED:
        return policy.fixed_n
    cost = COSTS[policy.kind]
    best_n = None
    best_cost = None
    for n in actions:
        c = cost(n, ctx, policy.v)
        if best_cost is None or c < best_cost:
            best_n, best_cost = n, c
    return best_n
