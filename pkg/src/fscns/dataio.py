"""CSV form of an :class:`FscDataset`.

One row per observation with header ``group,value`` and an optional
``truth`` column.  ``group`` is 1 or 2 for labeled values and 3 for
unlabeled ones; ``truth`` is only read for group 3.
"""
from __future__ import annotations

import csv
import os

import numpy as np

from .errors import DataParseError
from .sampling import FscDataset


def write_dataset_csv(data: FscDataset, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        has_truth = data.truth is not None
        writer.writerow(["group", "value"] + (["truth"] if has_truth else []))
        for group, values in ((1, data.labeled1), (2, data.labeled2)):
            for v in values:
                writer.writerow([group, repr(float(v))] + ([""] if has_truth else []))
        for i, v in enumerate(data.unlabeled):
            writer.writerow([3, repr(float(v))] + ([int(data.truth[i])] if has_truth else []))


def read_dataset_csv(path, k) -> FscDataset:
    if not os.path.exists(path):
        raise DataParseError(f"data file not found: {path}")
    groups = {1: [], 2: [], 3: []}
    truth = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataParseError("empty data file", 1)
        header = [h.strip().lower() for h in header]
        if header[:2] != ["group", "value"]:
            raise DataParseError(f"header must start with 'group,value', got {','.join(header)}", 1)
        with_truth = len(header) > 2 and header[2] == "truth"
        for row_no, row in enumerate(reader, 2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                group = int(row[0])
                value = float(row[1])
            except (ValueError, IndexError):
                raise DataParseError(f"cannot parse {row!r}", row_no) from None
            if group not in groups:
                raise DataParseError(f"group must be 1, 2 or 3, got {group}", row_no)
            if not np.isfinite(value):
                raise DataParseError("value is not finite", row_no)
            groups[group].append(value)
            if group == 3 and with_truth:
                cell = row[2].strip() if len(row) > 2 else ""
                truth.append(int(cell) if cell else 0)
    t = np.asarray(truth, dtype=int) if with_truth and truth and all(truth) else None
    return FscDataset(groups[1], groups[2], groups[3], k, t)
