'''Base model that all result tables inherit from

The database is a proxy bound at runtime by :func:`init_db`, so the same
models serve a results file on disk or an in-memory database in tests. The
``__str__`` method prints a row's fields for debugging purposes.
'''
import json
import logging

from peewee import DatabaseProxy, Model, SqliteDatabase

logger = logging.getLogger(__name__)

DB = DatabaseProxy()


class BaseModel(Model):
    '''A base model which sets up the database connection for all inherited classes
    '''
    class Meta:
        database = DB

    def __str__(self):
        r = {}
        for k in self.__data__.keys():
            try:
                r[k] = str(getattr(self, k))
            except BaseException:
                r[k] = json.dumps(getattr(self, k))
        return str(r)


def init_db(path):
    '''Binds the models to the SQLite file at ``path`` and creates missing tables

    Args:
        path(str): database file, or ``:memory:``

    Returns:
        SqliteDatabase: the bound database
    '''
    from semrate.models.frontier_record import FrontierRecord
    from semrate.models.metrics_record import MetricsRecord

    db = SqliteDatabase(path, pragmas={'journal_mode': 'wal'} if path != ':memory:' else {})
    DB.initialize(db)
    db.connect(reuse_if_open=True)
    db.create_tables([MetricsRecord, FrontierRecord])
    logger.info('Results database ready at %s', path)
    return db
