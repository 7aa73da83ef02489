"""Imposed nomination sampling on the Wisconsin Diagnostic Breast Cancer data.

Each replicate draws labeled malignant sets, labeled benign sets and pooled
unlabeled sets of ``k`` records, all disjoint.  Within a set the record with
the largest ``radius_worst`` is nominated and only its ``log(area_worst)``
is kept.  Malignant is component 1 and the positive class.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .em import GENERAL, EmConfig, Weights, fit_fsc_ns, fit_fsc_srs
from .errors import DataParseError, DegenerateFitError, InsufficientDataError
from .metrics import MetricsReport, score_classification
from .sampling import FscDataset, make_rng

N_COLUMNS = 32
RADIUS_WORST_COL = 22  # 0-based; file column 23
AREA_WORST_COL = 25  # 0-based; file column 26
EXPECTED_COUNTS = {"M": 212, "B": 357}
DATA_DIR_ENV = "FSCNS_DATA_DIR"


@dataclass(frozen=True)
class WdbcRecord:
    id: str
    diagnosis: str
    radius_worst: float
    area_worst: float

    @property
    def y(self):
        return float(np.log(self.area_worst))


def default_data_path():
    """``$FSCNS_DATA_DIR/wdbc.data``, else the ``data/`` directory of a source checkout."""
    base = os.environ.get(DATA_DIR_ENV)
    if base is None:
        base = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "..", "data")
    return os.path.normpath(os.path.join(base, "wdbc.data"))


def load_wdbc(path=None, check_counts=True):
    """Parse a UCI ``wdbc.data`` file into :class:`WdbcRecord` objects."""
    path = path or default_data_path()
    if not os.path.exists(path):
        raise DataParseError(f"data file not found: {path}")
    records = []
    with open(path, newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), 1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != N_COLUMNS:
                raise DataParseError(f"expected {N_COLUMNS} columns, found {len(row)}", row_no)
            diagnosis = row[1].strip()
            if diagnosis not in ("M", "B"):
                raise DataParseError(f"diagnosis must be M or B, got {diagnosis!r}", row_no)
            try:
                radius = float(row[RADIUS_WORST_COL])
                area = float(row[AREA_WORST_COL])
            except ValueError as exc:
                raise DataParseError(f"bad numeric value ({exc})", row_no) from None
            if not (area > 0 and np.isfinite(area) and np.isfinite(radius)):
                raise DataParseError(f"area_worst must be positive, got {area}", row_no)
            records.append(WdbcRecord(row[0].strip(), diagnosis, radius, area))
    if not records:
        raise DataParseError(f"no records in {path}")
    if check_counts:
        counts = {d: sum(r.diagnosis == d for r in records) for d in ("M", "B")}
        if counts != EXPECTED_COUNTS:
            raise DataParseError(
                f"class counts {counts} differ from {EXPECTED_COUNTS}; is this the WDBC file?")
    return records


@dataclass
class WdbcConfig:
    ks: tuple = (2, 3, 4)
    w3s: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    n1: int = 20
    n2: int = 20
    n3: int = 80
    B: int = 500
    seed: int = 2025
    path: str = None
    methods: tuple = ("FSC-NS", "FSC-SRS")


class _Table:
    """Column view of the records used by the replicate builder."""

    def __init__(self, records):
        self.ids = np.array([r.id for r in records])
        self.radius = np.array([r.radius_worst for r in records])
        self.y = np.log(np.array([r.area_worst for r in records]))
        self.malignant = np.array([r.diagnosis == "M" for r in records])


def _nominate(sets, radius):
    """Index of the largest ``radius`` in each row; ties go to the earliest record."""
    r = radius[sets]
    top = r == r.max(axis=1, keepdims=True)
    return np.where(top, sets, np.iinfo(np.int64).max).min(axis=1)


def build_replicate(records, k, n1=20, n2=20, n3=80, rng=None, return_ids=False):
    """Form one nominated dataset; every record is used at most once.

    Labeled sets come from within one class, unlabeled sets from the records
    left over after the labeled draw.  ``truth`` is 1 for malignant.
    """
    table = records if isinstance(records, _Table) else _Table(records)
    rng = rng if rng is not None else make_rng(0)
    mal = np.flatnonzero(table.malignant)
    ben = np.flatnonzero(~table.malignant)
    if n1 * k > mal.size or n2 * k > ben.size:
        raise InsufficientDataError(f"k={k} needs {n1 * k} malignant and {n2 * k} benign records")
    sets1 = rng.permutation(mal)[: n1 * k].reshape(n1, k)
    sets2 = rng.permutation(ben)[: n2 * k].reshape(n2, k)
    used = np.zeros(table.y.size, dtype=bool)
    used[sets1.ravel()] = True
    used[sets2.ravel()] = True
    rest = np.flatnonzero(~used)
    if n3 * k > rest.size:
        raise InsufficientDataError(f"k={k} needs {n3 * k} pooled records, only {rest.size} remain")
    sets3 = rng.permutation(rest)[: n3 * k].reshape(n3, k)
    nom1, nom2, nom3 = (_nominate(s, table.radius) for s in (sets1, sets2, sets3))
    truth = np.where(table.malignant[nom3], 1, 2)
    data = FscDataset(table.y[nom1], table.y[nom2], table.y[nom3], k, truth)
    if return_ids:
        consumed = np.concatenate([sets1.ravel(), sets2.ravel(), sets3.ravel()])
        sets = {"labeled1": table.ids[sets1], "labeled2": table.ids[sets2],
                "unlabeled": table.ids[sets3], "nominated_unlabeled": table.ids[nom3]}
        return data, table.ids[consumed], sets
    return data


_FITTERS = {"FSC-NS": fit_fsc_ns, "FSC-SRS": fit_fsc_srs}


def _wdbc_task(args):
    table, k, index, config = args
    data = build_replicate(table, k, config.n1, config.n2, config.n3, make_rng(config.seed, index))
    em_config = EmConfig()
    out = []
    for w3 in config.w3s:
        for method in config.methods:
            try:
                fit = _FITTERS[method](data, Weights(1.0, 1.0, w3), em_config, model=GENERAL)
            except DegenerateFitError:
                out.append((k, w3, method, index, None))
                continue
            scores = 1.0 - fit.scores  # P(malignant)
            report = score_classification(data.truth, scores, em_config.threshold, positive=1)
            out.append((k, w3, method, index, (report, fit.psi_hat.pi, fit.iterations, fit.converged)))
    return out


def run_wdbc(config: WdbcConfig, records=None, jobs=1):
    """Average both methods over ``B`` replicates for every (k, w3)."""
    records = records if records is not None else load_wdbc(config.path)
    table = _Table(records)
    tasks = [(table, int(k), i, config) for k in config.ks for i in range(config.B)]
    if jobs and jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_wdbc_task, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    else:
        results = [_wdbc_task(t) for t in tasks]
    cells = {}
    for batch in results:
        for k, w3, method, index, res in batch:
            cells.setdefault((k, w3, method), []).append((index, res))
    rows = []
    for k in config.ks:
        for w3 in config.w3s:
            for method in config.methods:
                entries = sorted(cells[(int(k), w3, method)], key=lambda e: e[0])
                ok = [res for _, res in entries if res is not None]
                row = {"k": int(k), "w3": float(w3), "method": method, "B": len(entries),
                       "n_ok": len(ok), "n_aborted": len(entries) - len(ok)}
                for name in MetricsReport.FIELDS:
                    row[name] = float(np.mean([r[0].__dict__[name] for r in ok])) if ok else float("nan")
                row["pi_hat"] = float(np.mean([r[1] for r in ok])) if ok else float("nan")
                row["iterations"] = float(np.mean([r[2] for r in ok])) if ok else float("nan")
                row["n_nonconverged"] = sum(not r[3] for r in ok)
                row["n_undefined_precision"] = sum("precision" in r[0].undefined for r in ok)
                row["seed"] = config.seed
                rows.append(row)
    return rows
