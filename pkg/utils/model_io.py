"""
    Text model format:

        BOBURL 1
        dropout <ratio>
        layer <out> <in>
        <out> lines of <in> space-separated weights
        one line of <out> biases
        ... (three layers)

    Reals are written in the shortest decimal form that parses back to the same
    float64, so save followed by load reproduces every parameter bit for bit.
"""
import math
from typing import Iterator, List, Tuple

import numpy as np

from modules.nn.layers import DenseLayer
from modules.nn.mlp import MlpModel
from utils import atomic_write, open_text
from utils.errors import DimensionError, ModelFormatError

MAGIC = 'BOBURL'
FORMAT_VERSION = 1
STANDARD_DIMS = ((256, 512), (256, 256), (2, 256))


def format_real(v: float) -> str:
    if v == 0.:
        return '-0' if math.copysign(1., v) < 0 else '0'
    if v.is_integer() and abs(v) < 2 ** 53:
        return str(int(v))
    return repr(v)


def format_row(values: np.ndarray) -> str:
    return ' '.join(format_real(v) for v in values.tolist())


def save(model: MlpModel, path):
    with atomic_write(path) as f:
        f.write(f'{MAGIC} {FORMAT_VERSION}\n')
        f.write(f'dropout {format_real(model.dropout_ratio)}\n')
        for layer in model.layers:
            f.write(f'layer {layer.out_dim} {layer.in_dim}\n')
            for row in layer.weights:
                f.write(format_row(row) + '\n')
            f.write(format_row(layer.bias) + '\n')


class _LineReader:
    def __init__(self, lines: List[str]):
        self.lines = lines
        self.pos = 0

    @property
    def line_no(self) -> int:
        return self.pos + 1

    def next(self, what: str) -> str:
        if self.pos >= len(self.lines):
            raise ModelFormatError(f'unexpected end of file, expected {what}', self.line_no)
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def reals(self, count: int, what: str) -> np.ndarray:
        line = self.next(what)
        fields = line.split()
        if len(fields) != count:
            raise ModelFormatError(f'expected {count} values for {what}, got {len(fields)}', self.pos)
        try:
            values = np.array([float(x) for x in fields], dtype=np.float64)
        except ValueError as e:
            raise ModelFormatError(f'malformed number in {what}: {e}', self.pos) from None
        if not np.isfinite(values).all():
            raise ModelFormatError(f'non-finite number in {what}', self.pos)
        return values


def _parse_header(reader: _LineReader) -> float:
    magic = reader.next('magic line').split()
    if len(magic) != 2 or magic[0] != MAGIC:
        raise ModelFormatError(f'not a model file (expected \'{MAGIC} {FORMAT_VERSION}\')', 1)
    if magic[1] != str(FORMAT_VERSION):
        raise ModelFormatError(f'unsupported format version \'{magic[1]}\', expected {FORMAT_VERSION}', 1)
    fields = reader.next('dropout line').split()
    if len(fields) != 2 or fields[0] != 'dropout':
        raise ModelFormatError('expected \'dropout <value>\'', reader.pos)
    try:
        dropout_ratio = float(fields[1])
    except ValueError:
        raise ModelFormatError(f'malformed dropout value \'{fields[1]}\'', reader.pos) from None
    if not math.isfinite(dropout_ratio):
        raise ModelFormatError(f'malformed dropout value \'{fields[1]}\'', reader.pos)
    return dropout_ratio


def _parse_layers(reader: _LineReader) -> Iterator[Tuple[int, DenseLayer]]:
    for index in range(1, 4):
        header = reader.next(f'header of layer {index}').split()
        if len(header) != 3 or header[0] != 'layer' or not header[1].isdigit() or not header[2].isdigit():
            raise ModelFormatError(f'expected \'layer <out> <in>\' for layer {index}', reader.pos)
        out_dim, in_dim = int(header[1]), int(header[2])
        weights = np.stack([
            reader.reals(in_dim, f'layer {index} weight row {r}') for r in range(out_dim)
        ]) if out_dim > 0 else np.zeros((0, in_dim))
        bias = reader.reals(out_dim, f'layer {index} biases')
        yield index, DenseLayer(weights, bias)


def load(path, allow_any_dims: bool = False) -> MlpModel:
    with open_text(path) as f:
        lines = [line.rstrip('\r\n') for line in f]
    while lines and lines[-1].strip() == '':
        lines.pop()
    reader = _LineReader(lines)
    dropout_ratio = _parse_header(reader)
    layers = [layer for _, layer in _parse_layers(reader)]
    if reader.pos != len(lines):
        raise ModelFormatError('trailing content after the third layer', reader.line_no)

    dims = tuple((layer.out_dim, layer.in_dim) for layer in layers)
    if not allow_any_dims and dims != STANDARD_DIMS:
        raise DimensionError(
            f'Model has layer shapes {dims}, expected {STANDARD_DIMS}. '
            f'Use --allow-any-dims to load models of other sizes.'
        )
    if not 0. <= dropout_ratio < 1.:
        raise ModelFormatError(f'dropout ratio {dropout_ratio} outside [0, 1)', 2)
    try:
        return MlpModel(*layers, dropout_ratio=dropout_ratio)
    except DimensionError as e:
        raise ModelFormatError(str(e)) from None
