"""Reading observation and label CSV files into field samples.

Observation files carry one row per pixel (or per pre-aggregated field) and
acquisition::

    field_id,year,doy,blue,green,red,nir,qa,vi

``doy`` is a day-of-year integer or an ISO date. Band cells or the ``vi``
cell may be empty, but not both. Label files are ``field_id,year,crop``.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import logging
import math
import os
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .exceptions import ConflictError, SchemaError, ValidationError
from .series import FieldSample, QualityFlag, Series
from .vegindex import IndexKind, IndexParams, compute_index

logger = logging.getLogger(__name__)

OBSERVATION_COLUMNS = ("field_id", "year", "doy", "blue", "green", "red", "nir", "qa", "vi")
LABEL_COLUMNS = ("field_id", "year", "crop")
BANDS = ("blue", "green", "red", "nir")

LabelTable = Dict[Tuple[str, int], str]


@dataclass(frozen=True)
class ObservationRow:
    field_id: str
    year: int
    doy: int
    blue: Optional[float] = None
    green: Optional[float] = None
    red: Optional[float] = None
    nir: Optional[float] = None
    qa: QualityFlag = QualityFlag.CLEAR
    vi: Optional[float] = None

    def __post_init__(self):
        if not 1 <= self.doy <= _days_in_year(self.year):
            raise ValidationError(f"doy {self.doy} outside [1, {_days_in_year(self.year)}]")
        if self.vi is None and all(getattr(self, b) is None for b in BANDS):
            raise ValidationError("row has neither band reflectances nor a vi value")

    def index_value(self, kind: IndexKind, params: IndexParams = IndexParams()) -> float:
        if self.vi is not None:
            return self.vi
        return float(
            compute_index(kind, self.blue, self.green, self.red, self.nir, params)
        )


def _days_in_year(year: int) -> int:
    leap = year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)
    return 366 if leap else 365


def _open_text(source) -> io.TextIOBase:
    """Accept a path, raw bytes, a binary stream or a text stream."""
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="", encoding="utf-8")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"), newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _reader(source, columns):
    stream = _open_text(source)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("file is empty; a header row is required") from None
    header = [h.strip() for h in header]
    missing = [c for c in columns if c not in header]
    if missing:
        raise SchemaError(f"missing required column(s): {', '.join(missing)}")
    extra = [h for h in header if h not in columns]
    if extra:
        raise SchemaError(f"unexpected column(s): {', '.join(extra)}")
    return stream, reader, header


def _float(text: str, name: str, row: int) -> Optional[float]:
    text = text.strip()
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"{name}={text!r} is not a number", row=row) from None
    if not math.isfinite(value):
        raise ValidationError(f"{name}={text!r} is not finite", row=row)
    return value


def _int(text: str, name: str, row: int) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ValidationError(f"{name}={text!r} is not an integer", row=row) from None


def _doy(text: str, year: int, row: int) -> int:
    text = text.strip()
    if "-" in text:
        try:
            date = dt.date.fromisoformat(text)
        except ValueError:
            raise ValidationError(f"doy={text!r} is not an ISO date", row=row) from None
        if date.year != year:
            raise ValidationError(f"date {text} does not fall in year {year}", row=row)
        return date.timetuple().tm_yday
    return _int(text, "doy", row)


def parse_observations(source) -> List[ObservationRow]:
    """Parse an observations CSV.

    Row numbers in error messages are file line numbers (the header is line 1).

    Raises
    ------
    SchemaError
        Missing or unexpected columns.
    ValidationError
        Unparseable numbers, out-of-range days or unknown quality flags.
    """
    stream, reader, header = _reader(source, OBSERVATION_COLUMNS)
    col = {name: header.index(name) for name in OBSERVATION_COLUMNS}
    rows = []
    with stream:
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ValidationError(
                    f"expected {len(header)} cells, found {len(rec)}", row=lineno
                )
            get = lambda name: rec[col[name]]
            year = _int(get("year"), "year", lineno)
            try:
                qa = QualityFlag.parse(get("qa"))
                rows.append(
                    ObservationRow(
                        field_id=get("field_id").strip(),
                        year=year,
                        doy=_doy(get("doy"), year, lineno),
                        **{b: _float(get(b), b, lineno) for b in BANDS},
                        qa=qa,
                        vi=_float(get("vi"), "vi", lineno),
                    )
                )
            except ValidationError as exc:
                if exc.row is not None:
                    raise
                raise ValidationError(str(exc), row=lineno) from None
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, QualityFlag):
        return value.value
    return repr(value) if isinstance(value, float) else str(value)


def write_observations(rows: Iterable[ObservationRow], stream) -> None:
    """Write rows in the observations schema (floats in round-trip precision)."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(OBSERVATION_COLUMNS)
    for r in rows:
        writer.writerow([_cell(getattr(r, c)) for c in OBSERVATION_COLUMNS])


def parse_labels(source) -> LabelTable:
    """Parse ``field_id,year,crop`` into ``{(field_id, year): crop}``.

    Raises
    ------
    ConflictError
        If a ``(field_id, year)`` key appears twice, even with the same crop.
    """
    stream, reader, header = _reader(source, LABEL_COLUMNS)
    col = {name: header.index(name) for name in LABEL_COLUMNS}
    table: LabelTable = {}
    seen: Dict[Tuple[str, int], int] = {}
    with stream:
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ValidationError(
                    f"expected {len(header)} cells, found {len(rec)}", row=lineno
                )
            key = (rec[col["field_id"]].strip(), _int(rec[col["year"]], "year", lineno))
            if key in seen:
                raise ConflictError(
                    f"duplicate label for field {key[0]!r}, year {key[1]}: "
                    f"rows {seen[key]} and {lineno}"
                )
            seen[key] = lineno
            table[key] = rec[col["crop"]].strip()
    return table


def write_labels(labels: LabelTable, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(LABEL_COLUMNS)
    for (fid, year), crop in sorted(labels.items()):
        writer.writerow([fid, year, crop])


def _aggregate_flag(flags: List[QualityFlag]) -> QualityFlag:
    if QualityFlag.CLEAR in flags:
        return QualityFlag.CLEAR
    counts = Counter(flags)
    # ties go to the earlier enum member (cloud before shadow)
    return max(
        (QualityFlag.CLOUD, QualityFlag.SHADOW), key=lambda f: (counts[f], f is QualityFlag.CLOUD)
    )


def build_field_samples(
    rows: Iterable[ObservationRow],
    labels: Optional[LabelTable] = None,
    index: IndexKind = IndexKind.MSAVI,
    params: IndexParams = IndexParams(),
) -> List[FieldSample]:
    """Aggregate pixel rows into one median series per field and year.

    Each pixel's index value is computed first (or taken from ``vi``); the
    field value on a day is the median over its pixels. The day is flagged
    clear if at least one of its pixels is clear, otherwise by the majority
    non-clear flag. Samples are returned sorted by ``(field_id, year)``.
    Label entries of an observed year that have no observations are counted
    in a warning; fields without a label are returned unlabeled.
    """
    index = IndexKind.parse(index)
    labels = labels or {}
    groups = defaultdict(lambda: defaultdict(list))
    for r in rows:
        groups[(r.field_id, r.year)][r.doy].append((r.index_value(index, params), r.qa))

    samples = []
    for key in sorted(groups):
        by_day = groups[key]
        days = sorted(by_day)
        values = [float(np.median([v for v, _ in by_day[d]])) for d in days]
        flags = [_aggregate_flag([q for _, q in by_day[d]]) for d in days]
        samples.append(
            FieldSample(key[0], key[1], Series(days, values, flags), labels.get(key))
        )
    years = {key[1] for key in groups}
    orphans = sum(1 for key in labels if key[1] in years and key not in groups)
    if orphans:
        logger.warning("%d labeled field(s) have no observations and were skipped", orphans)
    return samples


def samples_to_rows(samples: Iterable[FieldSample]) -> List[ObservationRow]:
    """Flatten field samples into observation rows carrying only ``vi``."""
    rows = []
    for s in samples:
        for day, value, flag in zip(s.series.days, s.series.values, s.series.flags):
            rows.append(
                ObservationRow(s.field_id, s.year, int(round(day)), qa=flag, vi=float(value))
            )
    return rows
