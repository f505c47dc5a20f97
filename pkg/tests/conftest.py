import pytest

from semrate.controllers import Policy, PolicyKind
from semrate.error_model import ActionSet, ErrorCurve
from semrate.models import init_db


@pytest.fixture
def actions():
    return ActionSet((10, 15, 20))


@pytest.fixture
def reference_curve(actions):
    '''N=10 meets only eps=0.3, N=15 meets eps=0.25, N=20 meets eps=0.2'''
    return ErrorCurve(actions, (0.30, 0.22, 0.18), snr_tag='reference')


@pytest.fixture
def perfect_curve():
    return ErrorCurve(ActionSet((5,)), (0.0,))


@pytest.fixture
def fixed5():
    return Policy(PolicyKind.FIXED, fixed_n=5)


@pytest.fixture
def memory_db():
    db = init_db(':memory:')
    yield db
    db.close()


REFERENCE_TABLE = 'n,p_e\n10,0.30\n15,0.22\n20,0.18\n'


@pytest.fixture
def table_file(tmp_path):
    path = tmp_path / 'curve.csv'
    path.write_text(REFERENCE_TABLE, encoding='utf-8')
    return path
