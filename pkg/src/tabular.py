"""Typed tabular data with explicit missing cells, plus CSV ingestion."""

import csv
import logging
import math
from collections import Counter
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.exceptions import (
    DataError,
    DuplicateColumnError,
    RaggedRowError,
    UnknownColumnError,
)

logger = logging.getLogger(__name__)

# A cell is a finite float, a string, or None for missing.
CellValue = Union[float, str, None]

DEFAULT_NULL_TOKENS = frozenset({"", "NULL", "null"})


class ColumnKind(str, Enum):
    """Kind of a frame column."""
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


def parse_number(text: str) -> Optional[float]:
    """Parse a trimmed cell as a float; None if it is not a number.

    Non-finite values (nan, inf) parse but come back as float('nan') so the
    caller can store them as missing.
    """
    if "_" in text:
        return None
    try:
        return float(text)
    except ValueError:
        return None


class Frame:
    """Immutable in-memory table with one kind per column."""

    def __init__(
        self,
        column_names: Sequence[str],
        kinds: Sequence[ColumnKind],
        rows: Iterable[Sequence[CellValue]],
    ):
        names = tuple(column_names)
        seen = set()
        for name in names:
            if name in seen:
                raise DuplicateColumnError(name)
            seen.add(name)
        if len(kinds) != len(names):
            raise DataError(f"{len(kinds)} kinds given for {len(names)} columns")

        self._names: Tuple[str, ...] = names
        self._kinds: Tuple[ColumnKind, ...] = tuple(ColumnKind(k) for k in kinds)
        self._index: Dict[str, int] = {name: i for i, name in enumerate(names)}

        grid = []
        for row_index, row in enumerate(rows):
            row = tuple(row)
            if len(row) != len(names):
                raise RaggedRowError(row_index, len(names), len(row))
            for col, (cell, kind) in enumerate(zip(row, self._kinds)):
                _check_cell(cell, kind, names[col], row_index)
            grid.append(row)
        self._rows: Tuple[Tuple[CellValue, ...], ...] = tuple(grid)

    @property
    def column_names(self) -> Tuple[str, ...]:
        return self._names

    @property
    def kinds(self) -> Tuple[ColumnKind, ...]:
        return self._kinds

    @property
    def rows(self) -> Tuple[Tuple[CellValue, ...], ...]:
        return self._rows

    @property
    def n_rows(self) -> int:
        return len(self._rows)

    @property
    def n_cols(self) -> int:
        return len(self._names)

    def __contains__(self, column: str) -> bool:
        return column in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (
            self._names == other._names
            and self._kinds == other._kinds
            and self._rows == other._rows
        )

    def __repr__(self) -> str:
        return f"Frame(n_rows={self.n_rows}, n_cols={self.n_cols})"

    def position(self, column: str) -> int:
        """Index of a column; raises UnknownColumnError."""
        try:
            return self._index[column]
        except KeyError:
            raise UnknownColumnError(column) from None

    def kind(self, column: str) -> ColumnKind:
        return self._kinds[self.position(column)]

    def column(self, column: str) -> Tuple[CellValue, ...]:
        """All cells of one column, in row order."""
        col = self.position(column)
        return tuple(row[col] for row in self._rows)

    def take(self, indices: Iterable[int]) -> "Frame":
        """New frame with the given rows, in the given order."""
        rows = [self._rows[int(i)] for i in indices]
        return Frame(self._names, self._kinds, rows)

    def drop_missing(self, column: str) -> "Frame":
        """New frame without the rows whose cell in `column` is missing."""
        col = self.position(column)
        kept = [row for row in self._rows if row[col] is not None]
        return Frame(self._names, self._kinds, kept)

    def to_csv(self, path: Union[str, Path], null_token: str = "NULL") -> Path:
        """Write the frame as CSV; numbers use round-trip repr."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = {
            name: [_format_cell(row[i], null_token) for row in self._rows]
            for i, name in enumerate(self._names)
        }
        pd.DataFrame(data, columns=list(self._names)).to_csv(
            path, index=False, lineterminator="\n", encoding="utf-8"
        )
        return path

    @classmethod
    def from_text(
        cls,
        header: Sequence[str],
        records: Sequence[Sequence[str]],
        null_tokens: Iterable[str] = DEFAULT_NULL_TOKENS,
        kind_overrides: Optional[Mapping[str, ColumnKind]] = None,
    ) -> "Frame":
        """Build a frame from raw text cells, inferring column kinds.

        A column is numeric iff every non-missing cell parses as a number,
        unless `kind_overrides` says otherwise.
        """
        names = [h.strip() for h in header]
        if not names:
            raise DataError("header row is empty")
        seen = set()
        for name in names:
            if name in seen:
                raise DuplicateColumnError(name)
            seen.add(name)
        # overrides naming absent columns are ignored; callers check schemas
        overrides = dict(kind_overrides or {})

        tokens = frozenset(null_tokens)
        width = len(names)
        trimmed: List[List[Optional[str]]] = []
        for row_index, record in enumerate(records):
            if len(record) != width:
                raise RaggedRowError(row_index, width, len(record))
            trimmed.append([None if c.strip() in tokens else c.strip() for c in record])

        columns: List[List[CellValue]] = []
        kinds: List[ColumnKind] = []
        for col, name in enumerate(names):
            texts = [row[col] for row in trimmed]
            parsed = [None if t is None else parse_number(t) for t in texts]
            numeric_ok = all(p is not None for t, p in zip(texts, parsed) if t is not None)
            kind = overrides.get(name, ColumnKind.NUMERIC if numeric_ok else ColumnKind.CATEGORICAL)
            kind = ColumnKind(kind)

            if kind is ColumnKind.NUMERIC:
                if not numeric_ok:
                    bad = next(i for i, (t, p) in enumerate(zip(texts, parsed)) if t is not None and p is None)
                    raise DataError(
                        f"column '{name}' declared numeric but row {bad} holds '{texts[bad]}'"
                    )
                columns.append([p if p is not None and math.isfinite(p) else None for p in parsed])
            else:
                columns.append(list(texts))
            kinds.append(kind)

        return cls(names, kinds, list(zip(*columns)))


def _check_cell(cell: CellValue, kind: ColumnKind, column: str, row_index: int) -> None:
    if cell is None:
        return
    if kind is ColumnKind.NUMERIC:
        if isinstance(cell, bool) or not isinstance(cell, float):
            raise DataError(f"column '{column}' row {row_index}: numeric cell must be a float, got {cell!r}")
        if not math.isfinite(cell):
            raise DataError(f"column '{column}' row {row_index}: non-finite number")
    elif not isinstance(cell, str):
        raise DataError(f"column '{column}' row {row_index}: categorical cell must be text, got {cell!r}")


def _format_cell(cell: CellValue, null_token: str) -> str:
    if cell is None:
        return null_token
    if isinstance(cell, float):
        return repr(cell)
    return cell


def load_csv(
    path: Union[str, Path],
    null_tokens: Iterable[str] = DEFAULT_NULL_TOKENS,
    kind_overrides: Optional[Mapping[str, ColumnKind]] = None,
) -> Frame:
    """Load a UTF-8, comma-separated CSV file with a header row into a Frame."""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            records = list(csv.reader(handle, delimiter=",", quotechar='"', strict=True))
    except (OSError, UnicodeDecodeError, csv.Error) as e:
        raise DataError(f"cannot read {path}: {e}") from e

    if not records:
        raise DataError(f"{path} is empty; a header row is required")
    header, body = records[0], records[1:]
    frame = Frame.from_text(header, body, null_tokens=null_tokens, kind_overrides=kind_overrides)
    logger.info("Loaded %s: %d rows x %d columns", path, frame.n_rows, frame.n_cols)
    return frame


def null_fraction(frame: Frame, column: str) -> float:
    """Fraction of missing cells in a column."""
    cells = frame.column(column)
    if frame.n_rows == 0:
        raise DataError("null_fraction of an empty frame")
    missing = sum(1 for cell in cells if cell is None)
    return missing / frame.n_rows


def column_stats(frame: Frame, column: str) -> Union[float, str]:
    """Mean of a numeric column or mode of a categorical one, over non-missing cells.

    Mode ties go to the lexicographically smallest value.
    """
    present = [cell for cell in frame.column(column) if cell is not None]
    if not present:
        raise DataError(f"column '{column}' has no non-missing cells")
    if frame.kind(column) is ColumnKind.NUMERIC:
        return float(np.mean(np.asarray(present, dtype=np.float64)))
    counts = Counter(present)
    top = max(counts.values())
    return min(value for value, count in counts.items() if count == top)
