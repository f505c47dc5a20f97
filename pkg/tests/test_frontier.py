import pytest

from semrate import frontier
from semrate.controllers import Policy
from semrate.error_model import ActionSet, ErrorCurve
from semrate.frontier import FrontierPoint, Objective, derive_seed, evaluate_policy, select_best, sweep_v
from semrate.metrics import ReplicationSummary, RunMetrics, pooled_standard_error
from semrate.sim_engine import SimConfig

SEEDS = [1, 2, 3]


def point(v, objective, feasible=True):
    return FrontierPoint(v=v, objective=objective, objective_std=0.0, err_rate=0.1, err_rate_std=0.0, mean_n=10.0,
                         feasible=feasible, stable=True, n_seeds=3)


class TestSelectBest:
    def test_lowest_feasible_objective(self):
        points = [point(0.0, 5.0, feasible=False), point(1.0, 9.0), point(10.0, 7.0), point(100.0, 8.0)]
        assert select_best(points).v == 10.0

    def test_ties_keep_smallest_v(self):
        assert select_best([point(100.0, 7.0), point(1.0, 7.0), point(10.0, 7.0)]).v == 1.0

    def test_nothing_feasible(self):
        assert select_best([point(0.0, 1.0, feasible=False)]) is None


class TestFeasibility:
    def test_margin(self):
        runs = [RunMetrics(err_rate=e) for e in (0.18, 0.20, 0.22)]
        summary = ReplicationSummary.from_runs(runs)
        # 0.20 + 0.02 / sqrt(3)
        assert not frontier.is_feasible(summary, 0.2)
        assert frontier.is_feasible(summary, 0.212)

    def test_unstable_is_infeasible(self):
        runs = [RunMetrics(err_rate=0.0), RunMetrics(err_rate=0.0, stable=False)]
        assert not frontier.is_feasible(ReplicationSummary.from_runs(runs), 0.5)


def test_derive_seed():
    assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
    assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)
    assert derive_seed(1, 1, 2) != derive_seed(0, 1, 2)
    assert 0 <= derive_seed(2 ** 64 - 1, 7) < 2 ** 63


def test_default_v_grid():
    grid = frontier.default_v_grid()
    assert grid[0] == 0.0
    assert grid[1] == pytest.approx(1e-2)
    assert grid[-1] == pytest.approx(1e6)
    assert grid == sorted(grid)


class TestSweepV:
    cfg = SimConfig(0.03, 2e4)

    def test_zero_weight_is_pure_delay(self, reference_curve):
        result = sweep_v(0.03, 0.5, Policy.parse('dpp-queue'), [0.0], self.cfg, reference_curve, SEEDS)
        assert result.best is not None
        assert result.best.v == 0.0
        assert result.best.mean_n == 10
        baseline = evaluate_policy(self.cfg, Policy.parse('fixed:10'), reference_curve, 0.5,
                                   [derive_seed(s, 0) for s in SEEDS])
        assert result.best.objective == baseline.objective

    def test_zero_cap_is_infeasible(self, reference_curve):
        result = sweep_v(0.03, 0.0, Policy.parse('dpp-queue'), [0.0, 10.0, 1e4], self.cfg, reference_curve, SEEDS)
        assert result.infeasible_all
        assert len(result.points) == 3
        assert not any(row['selected'] for row in result.rows(0.03, 0.0, 'dpp-queue'))

    def test_rows_mark_selection(self, reference_curve):
        result = sweep_v(0.03, 0.3, Policy.parse('dpp-queue'), [0.0, 100.0], self.cfg, reference_curve, SEEDS)
        rows = list(result.rows(0.03, 0.3, 'dpp-queue'))
        assert [r['v'] for r in rows] == [0.0, 100.0]
        assert sum(r['selected'] for r in rows) == (0 if result.infeasible_all else 1)
        assert set(rows[0]) == set(frontier.FRONTIER_COLUMNS)

    def test_aoi_policy_defaults_to_age(self, reference_curve):
        result = sweep_v(0.03, 0.5, Policy.parse('dpp-aoi'), [0.0], self.cfg, reference_curve, SEEDS)
        delay = sweep_v(0.03, 0.5, Policy.parse('dpp-aoi'), [0.0], self.cfg, reference_curve, SEEDS,
                        objective=Objective.DELAY)
        assert result.points[0].objective != delay.points[0].objective

    @pytest.mark.parametrize('grid,seeds', [([], SEEDS), ([-1.0], SEEDS), ([10.0, 1.0], SEEDS), ([0.0], [])])
    def test_rejects(self, reference_curve, grid, seeds):
        with pytest.raises(ValueError):
            sweep_v(0.03, 0.3, Policy.parse('dpp-queue'), grid, self.cfg, reference_curve, seeds)

    def test_rejects_fixed_policy(self, reference_curve):
        with pytest.raises(ValueError):
            sweep_v(0.03, 0.3, Policy.parse('fixed:10'), [0.0], self.cfg, reference_curve, SEEDS)


def test_short_service_cannot_meet_tight_cap(reference_curve):
    result = evaluate_policy(SimConfig(0.03, 2e4), Policy.parse('fixed:10'), reference_curve, 0.2, SEEDS)
    assert not result.feasible
    assert result.err_rate == pytest.approx(0.30, abs=0.05)


def test_load_curve_layout(reference_curve):
    policies = [Policy.parse('fixed:20'), Policy.parse('dpp-queue')]
    rows = frontier.trace_load_curve([0.01, 0.02], 0.25, policies, SimConfig(0.01, 5e3), reference_curve,
                                     v_grid=[0.0, 100.0], n_seeds=2)
    assert [(r.arrival_rate, r.policy) for r in rows] == [
        (0.01, 'fixed:20'), (0.01, 'dpp-queue'), (0.02, 'fixed:20'), (0.02, 'dpp-queue')]
    assert set(rows[0].row()) == set(frontier.LOAD_CURVE_COLUMNS)
    assert rows[0].point.mean_n == 20


def test_parallel_matches_serial(reference_curve):
    args = (0.03, 0.25, Policy.parse('dpp-queue'), [0.0, 10.0], SimConfig(0.03, 5e3), reference_curve, SEEDS)
    assert sweep_v(*args, jobs=1) == sweep_v(*args, jobs=2)


def test_overloaded_baseline_is_infeasible(reference_curve):
    # lambda * 20 = 1.2: the error rate meets the cap but the queue grows without bound
    point = evaluate_policy(SimConfig(0.06, 1e5), Policy.parse('fixed:20'), reference_curve, 0.25, SEEDS)
    assert point.err_rate <= 0.25
    assert not point.stable
    assert not point.feasible


def test_load_curve_selected_flag(reference_curve):
    policies = [Policy.parse('fixed:20'), Policy.parse('dpp-queue')]
    rows = frontier.trace_load_curve([0.01], 0.25, policies, SimConfig(0.01, 5e3), reference_curve,
                                     v_grid=[0.0, 1e4], n_seeds=2)
    assert not rows[0].selected
    assert rows[1].selected == rows[1].point.feasible
    # V = 0 always serves N=10, which cannot meet a cap of 0.1
    rows = frontier.trace_load_curve([0.01], 0.1, [Policy.parse('dpp-queue')], SimConfig(0.01, 5e3),
                                     reference_curve, v_grid=[0.0], n_seeds=2)
    assert not rows[0].selected


REFERENCE = ErrorCurve(ActionSet((10, 15, 20)), (0.30, 0.22, 0.18), snr_tag='reference')
BASELINES = [Policy.parse('fixed:{}'.format(n)) for n in (10, 15, 20)]
DELAY_LOADS = (0.01, 0.02, 0.03)


def pooled_se(a, b):
    return pooled_standard_error([a.objective_std, b.objective_std], [a.n_seeds, b.n_seeds])


def load_points(lambdas, epsilon, policy, horizon, objective=Objective.DELAY):
    rows = frontier.trace_load_curve(lambdas, epsilon, BASELINES + [policy], SimConfig(lambdas[0], horizon), REFERENCE,
                                     objective=objective, n_seeds=5)
    return {(r.policy, r.arrival_rate): r.point for r in rows}


@pytest.fixture(scope='module')
def delay_curves():
    return {eps: load_points(DELAY_LOADS, eps, Policy.parse('dpp-queue'), 2e5) for eps in (0.2, 0.25, 0.3)}


@pytest.mark.slow
@pytest.mark.parametrize('epsilon', [0.2, 0.25])
def test_controller_delay_matches_every_feasible_baseline(delay_curves, epsilon):
    points = delay_curves[epsilon]
    for lam in DELAY_LOADS:
        best = points['dpp-queue', lam]
        assert best.feasible
        for baseline in BASELINES:
            fixed = points[baseline.label, lam]
            if fixed.feasible and fixed.stable:
                assert best.objective <= fixed.objective + 3 * pooled_se(best, fixed), (lam, baseline.label)


@pytest.mark.slow
def test_tighter_cap_never_lowers_delay(delay_curves):
    for lam in DELAY_LOADS:
        tight = delay_curves[0.2]['dpp-queue', lam]
        loose = delay_curves[0.3]['dpp-queue', lam]
        assert tight.objective >= loose.objective - 2 * pooled_se(tight, loose), lam


@pytest.mark.slow
def test_short_service_infeasible_under_tight_cap(delay_curves):
    assert not any(delay_curves[0.2]['fixed:10', lam].feasible for lam in DELAY_LOADS)


@pytest.mark.slow
def test_age_is_u_shaped_in_load():
    rows = frontier.trace_load_curve([0.005, 0.035, 0.07], 0.25, [Policy.parse('dpp-aoi')], SimConfig(0.005, 1e5),
                                     REFERENCE, objective=Objective.AOI, n_seeds=5)
    low, mid, high = (r.point for r in rows)
    assert low.objective > mid.objective + 2 * pooled_se(low, mid)
    assert high.objective > mid.objective + 2 * pooled_se(high, mid)


@pytest.mark.slow
def test_age_controller_matches_every_feasible_baseline():
    lambdas = (0.01, 0.02, 0.03)
    points = load_points(lambdas, 0.25, Policy.parse('dpp-aoi'), 2e5, objective=Objective.AOI)
    for lam in lambdas:
        best = points['dpp-aoi', lam]
        assert best.feasible
        for baseline in BASELINES:
            fixed = points[baseline.label, lam]
            if fixed.feasible and fixed.stable:
                assert best.objective <= fixed.objective + 3 * pooled_se(best, fixed), (lam, baseline.label)
