"""exceptions.py

Custom exceptions raised internally.
"""


class InvalidArgumentsError(Exception):
    pass


class ConfigurationError(Exception):
    pass


class DegenerateInputError(Exception):
    pass


class InsufficientDataError(Exception):
    pass


class EmptyLabelError(Exception):
    pass


class DatasetError(Exception):
    pass


class LabelStoreError(Exception):
    pass


class CheckpointError(Exception):
    pass


class MetricsParseError(Exception):
    def __init__(self, message: str, lineno: int) -> None:
        super().__init__(f'line {lineno}: {message}')
        self.lineno = lineno


class NumericalFailureError(Exception):
    def __init__(self, message: str, batch_id: str) -> None:
        super().__init__(f'{message} (batch {batch_id})')
        self.batch_id = batch_id
