'''Reimports all result models within the module to make them more easily accessible'''
from semrate.models.base_model import DB, BaseModel, init_db
from semrate.models.frontier_record import FrontierRecord
from semrate.models.metrics_record import MetricsRecord
