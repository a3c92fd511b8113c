"""Reading and writing composite snapshots as CSV.

One file holds one M-bar x K snapshot as rows of
`element_index,subarray_index,real,imag` with 1-based indices. Values
are written with repr precision so a write / read round trip is exact.
"""

from __future__ import annotations

import csv
from typing import Sequence, Union

import numpy as np

from .array_model import ArrayGeometry, MeasurementMatrix
from .errors import SnapshotFormatError

HEADER = ("element_index", "subarray_index", "real", "imag")


def write_snapshot_csv(path, snapshot: Union[MeasurementMatrix, np.ndarray]) -> None:
    """Write a snapshot matrix to `path` in the standard CSV layout.

    Rows are emitted element-major then subarray, matching the reader's
    expectation of complete coverage in any order.
    """
    data = np.asarray(getattr(snapshot, "data", snapshot))
    if data.ndim != 2:
        raise SnapshotFormatError("snapshot must be a 2-D matrix")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HEADER)
        for m in range(data.shape[0]):
            for k in range(data.shape[1]):
                value = complex(data[m, k])
                writer.writerow([m + 1, k + 1, repr(value.real), repr(value.imag)])


def ingest_snapshot_csv(path, geometry: ArrayGeometry) -> MeasurementMatrix:
    """Read one snapshot CSV and check it against the geometry's grid.

    Every (element, subarray) cell must appear exactly once with indices
    inside the geometry's dimensions. Errors carry the offending 1-based
    file row number.
    """
    elements = geometry.elements_per_subarray
    subarrays = geometry.subarray_count
    data = np.full((elements, subarrays), np.nan, dtype=complex)
    seen = np.zeros((elements, subarrays), dtype=bool)
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SnapshotFormatError("file is empty", row=1) from None
        if tuple(field.strip() for field in header) != HEADER:
            raise SnapshotFormatError(
                f"header must be {','.join(HEADER)}", row=1
            )
        for row_number, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise SnapshotFormatError(
                    f"expected 4 fields, found {len(row)}", row=row_number
                )
            try:
                m = int(row[0])
                k = int(row[1])
            except ValueError:
                raise SnapshotFormatError(
                    "indices must be integers", row=row_number
                ) from None
            if not (1 <= m <= elements and 1 <= k <= subarrays):
                raise SnapshotFormatError(
                    f"cell (element {m}, subarray {k}) is outside the "
                    f"{elements}x{subarrays} geometry",
                    row=row_number,
                )
            try:
                real = float(row[2])
                imag = float(row[3])
            except ValueError:
                raise SnapshotFormatError(
                    "real and imag must be numeric", row=row_number
                ) from None
            if seen[m - 1, k - 1]:
                raise SnapshotFormatError(
                    f"duplicate cell (element {m}, subarray {k})", row=row_number
                )
            seen[m - 1, k - 1] = True
            data[m - 1, k - 1] = real + 1j * imag
    if not seen.all():
        missing = np.argwhere(~seen)[0]
        raise SnapshotFormatError(
            f"missing cell (element {missing[0] + 1}, subarray {missing[1] + 1})"
        )
    return MeasurementMatrix(data)


def superpose_snapshots(
    paths: Sequence, geometry: ArrayGeometry
) -> MeasurementMatrix:
    """Ingest several snapshot files and sum them entry-wise.

    This is the measured-data workflow of adding separately recorded
    per-source snapshots into one composite received signal.
    """
    if not paths:
        raise SnapshotFormatError("no snapshot files given")
    total = None
    for path in paths:
        matrix = ingest_snapshot_csv(path, geometry)
        total = matrix.data if total is None else total + matrix.data
    return MeasurementMatrix(total)
