"""
Binary field snapshots

Layout (little endian): b'CDBF', uint32 n, float64 h, float64 L, uint8 tag
(0 scalar, 1 coordinate form, 2 frame form), then complex128 values in C order,
one block per coefficient.
"""

import struct
from typing import Union

import numpy as np

from ..models.field_data import Grid, ScalarField, OneForm, COORDINATE, FRAME
from ..exceptions import InvalidInputError

MAGIC = b'CDBF'
HEADER = struct.Struct('<4sIddB')
TAGS = {'scalar': 0, COORDINATE: 1, FRAME: 2}


def save_snapshot(field: Union[ScalarField, OneForm], path: str) -> str:
    grid = field.grid
    if isinstance(field, OneForm):
        tag = TAGS[field.representation]
        blocks = field.coefficients
    else:
        tag = TAGS['scalar']
        blocks = (field.values,)
    with open(path, 'wb') as f:
        f.write(HEADER.pack(MAGIC, grid.n, grid.h, grid.half_width, tag))
        for block in blocks:
            f.write(np.ascontiguousarray(block, dtype='<c16').tobytes(order='C'))
    return path


def load_snapshot(path: str) -> Union[ScalarField, OneForm]:
    with open(path, 'rb') as f:
        data = f.read()
    if len(data) < HEADER.size:
        raise InvalidInputError(f"{path}: truncated snapshot header")
    magic, n, h, half_width, tag = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvalidInputError(f"{path}: not a field snapshot")
    grid = Grid(n=n, half_width=half_width)
    if not np.isclose(grid.h, h, rtol=1e-12, atol=0.0):
        raise InvalidInputError(f"{path}: spacing {h} inconsistent with n={n}, L={half_width}")

    count = n ** 4
    n_blocks = 1 if tag == 0 else 2
    if tag not in (0, 1, 2):
        raise InvalidInputError(f"{path}: unknown representation tag {tag}")
    if len(data) != HEADER.size + n_blocks * count * 16:
        raise InvalidInputError(f"{path}: expected {n_blocks} block(s) of {count} values")

    blocks = [np.frombuffer(data, dtype='<c16', count=count, offset=HEADER.size + b * count * 16)
              .reshape(grid.shape).astype(np.complex128) for b in range(n_blocks)]
    if tag == 0:
        return ScalarField(grid, blocks[0])
    representation = COORDINATE if tag == 1 else FRAME
    return OneForm(grid, blocks[0], blocks[1], representation)
