class BobUrlError(Exception):
    """Root of every error raised on bad input data, files or numerics."""
    pass


class InvalidInputError(BobUrlError):
    pass


class DimensionError(BobUrlError):
    pass


class NumericError(BobUrlError):
    pass


class NumericDivergenceError(NumericError):
    def __init__(self, epoch, batch, loss):
        super().__init__(f'Loss diverged to {loss} at epoch {epoch}, batch {batch}.')
        self.epoch = epoch
        self.batch = batch
        self.loss = loss


class DatasetError(BobUrlError):
    pass


class DatasetSchemaError(DatasetError):
    pass


class SamplingError(DatasetError):
    pass


class ModelFormatError(BobUrlError):
    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f'line {line_no}: {message}'
        super().__init__(message)
        self.line_no = line_no


class UnknownOptimizerError(BobUrlError):
    pass


class SingleClassError(BobUrlError):
    pass


class HparamsOverrideError(InvalidInputError):
    pass
