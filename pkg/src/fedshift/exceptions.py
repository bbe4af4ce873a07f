class FedShiftError(Exception):
    """Base error. ``context`` holds where it happened (seed, round, client, ...)."""

    def __init__(self, message='', **context):
        super().__init__(message)
        self.message = message
        self.context = dict(context)

    def add_context(self, **context):
        # inner frames know more; never overwrite what they recorded
        for key, value in context.items():
            self.context.setdefault(key, value)
        return self

    def __str__(self):
        if not self.context:
            return self.message
        where = ', '.join(f'{k}={v}' for k, v in self.context.items())
        return f'{self.message} ({where})'


class ConfigurationError(FedShiftError):
    pass


class DataError(FedShiftError):
    pass


class CorruptionError(FedShiftError):
    def __init__(self, message='', offset=None, **context):
        if offset is not None:
            context['offset'] = offset
        super().__init__(message, **context)
        self.offset = offset


class DivergenceError(FedShiftError):
    pass


class IdentityViolation(FedShiftError):
    pass


class OutputError(FedShiftError):
    pass
