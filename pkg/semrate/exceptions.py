'''Exceptions shared across the package'''


class ConfigError(ValueError):
    '''Raised when a run configuration or an error-curve table fails validation.

    Args:
        field(str): name of the offending configuration key, e.g. ``epsilon[0]``
        message(str): human readable reason
    '''

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__('{}: {}'.format(field, message))
