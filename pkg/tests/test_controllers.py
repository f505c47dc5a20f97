import numpy as np
import pytest

from semrate.controllers import (COSTS, DecisionContext, Policy, PolicyKind, aoi_aware_cost, queue_aware_cost,
                                 select)
from semrate.error_model import ActionSet, EstimatorMode

REFERENCE = {10: 0.30, 15: 0.22, 20: 0.18}


def ctx(q=1, z=0.0, delta=0.0, estimates=None):
    return DecisionContext(q_k=q, z_k=z, delta_k=delta, estimates=estimates or REFERENCE)


class TestPolicy:
    def test_parse_fixed(self):
        policy = Policy.parse('fixed:10')
        assert policy.kind is PolicyKind.FIXED
        assert policy.fixed_n == 10
        assert policy.label == 'fixed:10'
        assert not policy.is_dpp

    def test_parse_dpp(self):
        policy = Policy.parse('dpp-aoi', v=3, estimator='empirical')
        assert policy.kind is PolicyKind.DPP_AOI
        assert policy.v == 3.0
        assert policy.estimator_mode is EstimatorMode.EMPIRICAL
        assert policy.with_v(7).v == 7.0

    @pytest.mark.parametrize('spec', ['fixed', 'fixed:', 'fixed:x', 'fixed:0', 'dpp', 'greedy'])
    def test_parse_rejects(self, spec):
        with pytest.raises(ValueError):
            Policy.parse(spec)

    def test_negative_v(self):
        with pytest.raises(ValueError):
            Policy(PolicyKind.DPP_QUEUE, v=-1)

    def test_check_actions(self, actions):
        Policy.parse('fixed:15').check_actions(actions)
        with pytest.raises(ValueError):
            Policy.parse('fixed:12').check_actions(actions)


def test_context_needs_a_waiting_update():
    with pytest.raises(ValueError):
        DecisionContext(q_k=0, z_k=0.0, delta_k=0.0, estimates=REFERENCE)


class TestCosts:
    def test_queue_aware(self):
        assert queue_aware_cost(10, ctx(q=5, z=2.0), 10) == pytest.approx(56)

    @pytest.mark.parametrize('v,z', [(0.0, 40.0), (100.0, 0.0)])
    def test_queue_aware_pure_delay(self, v, z):
        assert queue_aware_cost(15, ctx(q=3, z=z), v) == pytest.approx(45)

    def test_aoi_aware(self):
        est = {4: 0.5, 10: 0.1}
        assert aoi_aware_cost(4, ctx(delta=7.0, estimates=est), 0) == pytest.approx(36)
        assert aoi_aware_cost(10, ctx(delta=0.0, estimates=est), 5) == pytest.approx(50)
        assert aoi_aware_cost(4, ctx(delta=7.0, z=3.0, estimates=est), 2) == pytest.approx(39)


class TestSelect:
    def test_fixed_ignores_state(self, actions):
        assert select(Policy.parse('fixed:15'), ctx(q=500, z=1e6), actions) == 15

    def test_backlog_favors_short_service(self, actions):
        assert select(Policy.parse('dpp-queue', v=10), ctx(q=5, z=2.0), actions) == 10

    def test_debt_favors_fidelity(self, actions):
        assert select(Policy.parse('dpp-queue', v=100), ctx(q=1, z=100.0), actions) == 20

    def test_stale_age_favors_short_service(self, actions):
        assert select(Policy.parse('dpp-aoi', v=100), ctx(delta=50.0), actions) == 10

    def test_zero_weight_picks_smallest(self, actions):
        for kind in ('dpp-queue', 'dpp-aoi'):
            assert select(Policy.parse(kind, v=0), ctx(q=1, z=1e9), actions) == actions.smallest

    def test_ties_pick_smallest(self):
        actions = ActionSet((1, 2))
        # 1*1 + 1*1*1.0 == 1*2 + 1*1*0.0
        tie = ctx(q=1, z=1.0, estimates={1: 1.0, 2: 0.0})
        assert select(Policy.parse('dpp-queue', v=1), tie, actions) == 1

    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        for _ in range(2000):
            m = int(rng.integers(1, 8))
            dims = tuple(int(n) for n in np.sort(rng.choice(np.arange(1, 65), size=m, replace=False)))
            actions = ActionSet(dims)
            probs = np.sort(rng.random(m))[::-1]
            c = DecisionContext(q_k=int(rng.integers(1, 100)), z_k=float(rng.exponential(5)),
                                delta_k=float(rng.exponential(50)),
                                estimates={n: float(p) for n, p in zip(dims, probs)})
            v = float(10 ** rng.uniform(-2, 4))
            for kind in (PolicyKind.DPP_QUEUE, PolicyKind.DPP_AOI):
                costs = [COSTS[kind](n, c, v) for n in dims]
                assert select(Policy(kind, v=v), c, actions) == dims[int(np.argmin(costs))]

    def test_monotone_in_backlog(self, actions):
        policy = Policy.parse('dpp-queue', v=10)
        chosen = [select(policy, ctx(q=q, z=5.0), actions) for q in range(1, 50)]
        assert all(a >= b for a, b in zip(chosen, chosen[1:]))

    def test_monotone_in_debt(self, actions):
        policy = Policy.parse('dpp-queue', v=10)
        chosen = [select(policy, ctx(q=3, z=z), actions) for z in np.linspace(0, 50, 101)]
        assert all(a <= b for a, b in zip(chosen, chosen[1:]))

    @pytest.mark.parametrize('c', [2, 4, 1024])
    def test_queue_rule_scale_invariant(self, actions, c):
        rng = np.random.default_rng(9)
        for _ in range(500):
            q = int(rng.integers(1, 64))
            v = float(rng.exponential(30))
            policy = Policy.parse('dpp-queue', v=v)
            assert select(policy, ctx(q=q, z=1.0), actions) == select(policy, ctx(q=q * c, z=float(c)), actions)

    def test_aoi_rule_not_scale_invariant(self):
        actions = ActionSet((1, 2))
        est = {1: 0.5, 2: 0.1}
        policy = Policy.parse('dpp-aoi', v=1)
        # costs (0.5 + 0.5z, 2 + 0.1z)
        assert select(policy, ctx(delta=0.0, z=100.0, estimates=est), actions) == 2
        assert select(policy, ctx(delta=0.0, z=1.0, estimates=est), actions) == 1
