"""Parsers for descriptor tables, landmark tracks, transcripts, lexicons and label manifests.

Every parser accepts either a string or a readable text stream. Numbers are
parsed with ``float()``, so the decimal point is always ``.`` whatever the
process locale. Parse errors carry a 1-based line number.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .datamodel import (
    N_LANDMARKS,
    DescriptorSeries,
    FeatureVector,
    LandmarkSeries,
    Modality,
    SessionRecord,
    Split,
    Transcript,
    Utterance,
)
from .exceptions import (
    ArityError,
    DepfusionError,
    DuplicateIdError,
    EmptyInputError,
    LabelRangeError,
    MalformedTimeError,
    MissingFieldError,
    NonMonotoneTimestampError,
    NonNumericCellError,
    ParseError,
    RaggedRowError,
    ValenceRangeError,
)

COVAREP_NAMES = (
    ("F0", "VUV", "NAQ", "QOQ", "H1", "H2", "PSP", "MDQ", "peakSlope", "Rd", "Rd_conf")
    + tuple(f"MCEP_{i}" for i in range(25))
    + tuple(f"HMPDM_{i}" for i in range(25))
    + tuple(f"HMPDD_{i}" for i in range(13))
)

_MISSING = {"", "nan", "-nan", "+nan", "na", "n/a", "inf", "-inf", "+inf", "infinity", "-infinity"}


@dataclass(frozen=True)
class ColumnMap:
    """Column bindings for the tabular formats.

    Descriptor tables without a header take ``descriptor_names``. Landmark
    tables are resolved by header name when a header exists, otherwise by the
    positional defaults (``frame, timestamp, x0..x67, y0..y67``).
    """

    descriptor_names: tuple[str, ...] = COVAREP_NAMES
    frame_period: float = 0.01
    delimiter: str = ","
    timestamp_column: str = "timestamp"
    x_columns: tuple[str, ...] = tuple(f"x{i}" for i in range(N_LANDMARKS))
    y_columns: tuple[str, ...] = tuple(f"y{i}" for i in range(N_LANDMARKS))
    confidence_column: str | None = "confidence"
    timestamp_index: int = 1
    x_start_index: int = 2
    y_start_index: int = 2 + N_LANDMARKS
    confidence_index: int | None = None

    @property
    def landmark_width(self):
        idx = [self.timestamp_index, self.x_start_index + N_LANDMARKS - 1,
               self.y_start_index + N_LANDMARKS - 1]
        if self.confidence_index is not None:
            idx.append(self.confidence_index)
        return max(idx) + 1


DEFAULT_COLUMN_MAP = ColumnMap()


def _text(source):
    if hasattr(source, "read"):
        return source.read()
    return source


def _lines(source):
    """Yield (line_number, stripped_line) for non-blank, non-comment lines."""
    for lineno, raw in enumerate(io.StringIO(_text(source)), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _cell(cell, lineno):
    """Parse one numeric cell. Returns (value, was_missing)."""
    s = cell.strip()
    if s.lower() in _MISSING:
        return 0.0, True
    try:
        v = float(s)
    except ValueError:
        raise NonNumericCellError(f"non-numeric cell {cell!r}", lineno) from None
    if not math.isfinite(v):
        return 0.0, True
    return v, False


def _rows(source, delimiter):
    for lineno, line in _lines(source):
        yield lineno, next(csv.reader([line], delimiter=delimiter))


def _is_header(cells):
    return not all(_is_number(c.strip()) or c.strip().lower() in _MISSING for c in cells)


# ---------------------------------------------------------------------------
# descriptor tables


def parse_descriptor_table(source, column_map: ColumnMap = DEFAULT_COLUMN_MAP) -> DescriptorSeries:
    """Parse a COVAREP-style CSV. Missing or non-finite cells become 0.0 and are counted."""
    rows = _rows(source, column_map.delimiter)
    names = None
    data = []
    nan_count = 0
    for lineno, cells in rows:
        if names is None:
            if _is_header(cells):
                names = tuple(c.strip() for c in cells)
                continue
            names = tuple(column_map.descriptor_names)
        if len(cells) != len(names):
            raise RaggedRowError(f"expected {len(names)} cells, got {len(cells)}", lineno)
        row = []
        for c in cells:
            v, missing = _cell(c, lineno)
            nan_count += missing
            row.append(v)
        data.append(row)
    if not data:
        raise EmptyInputError("descriptor table has no data rows")
    return DescriptorSeries(names, np.array(data, dtype=np.float64),
                            column_map.frame_period, nan_count)


def format_descriptor_table(series: DescriptorSeries, delimiter=",") -> str:
    out = io.StringIO()
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(series.descriptor_names)
    for row in series.frames:
        writer.writerow([repr(float(v)) for v in row])
    return out.getvalue()


# ---------------------------------------------------------------------------
# landmark tracks


def parse_landmark_table(source, column_map: ColumnMap = DEFAULT_COLUMN_MAP) -> LandmarkSeries:
    rows = list(_rows(source, column_map.delimiter))
    if not rows:
        raise EmptyInputError("landmark table has no rows")
    width = column_map.landmark_width
    t_idx = column_map.timestamp_index
    x_idx = [column_map.x_start_index + i for i in range(N_LANDMARKS)]
    y_idx = [column_map.y_start_index + i for i in range(N_LANDMARKS)]
    c_idx = column_map.confidence_index

    if _is_header(rows[0][1]):
        lineno, header = rows.pop(0)
        header = [h.strip() for h in header]
        try:
            t_idx = header.index(column_map.timestamp_column)
            x_idx = [header.index(c) for c in column_map.x_columns]
            y_idx = [header.index(c) for c in column_map.y_columns]
        except ValueError as exc:
            raise ArityError(f"header lacks a required column ({exc})", lineno) from None
        c_idx = None
        if column_map.confidence_column and column_map.confidence_column in header:
            c_idx = header.index(column_map.confidence_column)
        width = len(header)
    if not rows:
        raise EmptyInputError("landmark table has no data rows")

    frames, stamps, conf = [], [], []
    for lineno, cells in rows:
        if len(cells) != width:
            raise ArityError(f"expected {width} cells, got {len(cells)}", lineno)
        vals = [_cell(c, lineno)[0] for c in cells]
        t = vals[t_idx]
        if stamps and t < stamps[-1]:
            raise NonMonotoneTimestampError(f"timestamp {t} after {stamps[-1]}", lineno)
        stamps.append(t)
        frames.append([(vals[i], vals[j]) for i, j in zip(x_idx, y_idx)])
        if c_idx is not None:
            conf.append(vals[c_idx])
    return LandmarkSeries(np.array(frames), np.array(stamps), np.array(conf) if c_idx is not None else None)


def format_landmark_table(series: LandmarkSeries) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["frame", "timestamp"] + [f"x{i}" for i in range(N_LANDMARKS)]
                    + [f"y{i}" for i in range(N_LANDMARKS)])
    for k, (t, pts) in enumerate(zip(series.timestamps, series.frames)):
        writer.writerow([k + 1, repr(float(t))] + [repr(float(v)) for v in pts[:, 0]]
                        + [repr(float(v)) for v in pts[:, 1]])
    return out.getvalue()


# ---------------------------------------------------------------------------
# transcripts


def parse_transcript(source) -> Transcript:
    """Parse a tab-separated ``start_time, stop_time, speaker, value`` transcript."""
    utterances = []
    first = True
    for lineno, line in _lines(source):
        cells = line.split("\t")
        if first:
            first = False
            if not _is_number(cells[0].strip()):
                continue
        if len(cells) < 4:
            raise MissingFieldError(f"expected 4 tab-separated fields, got {len(cells)}", lineno)
        try:
            start, stop = float(cells[0]), float(cells[1])
        except ValueError:
            raise MalformedTimeError(f"bad time fields {cells[0]!r}, {cells[1]!r}", lineno) from None
        if not (math.isfinite(start) and math.isfinite(stop)) or stop < start:
            raise MalformedTimeError(f"stop_time {stop} before start_time {start}", lineno)
        utterances.append(Utterance(start, stop, cells[2].strip(), "\t".join(cells[3:]).strip()))
    return Transcript(tuple(utterances))


def format_transcript(transcript: Transcript) -> str:
    lines = ["start_time\tstop_time\tspeaker\tvalue"]
    for u in transcript.utterances:
        lines.append(f"{u.start_time!r}\t{u.stop_time!r}\t{u.speaker}\t{u.text}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# lexicons


class LexiconKind(str, enum.Enum):
    SENTIMENT = "sentiment"
    DEPRESSION = "depression"


@dataclass(frozen=True)
class Lexicon:
    kind: LexiconKind
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", LexiconKind(self.kind))
        if not self.entries:
            raise EmptyInputError(f"{self.kind.value} lexicon is empty")

    def __contains__(self, term):
        return term in self.entries

    def __len__(self):
        return len(self.entries)

    @property
    def words(self):
        return {t: v for t, v in self.entries.items() if " " not in t}

    @property
    def phrases(self):
        return {t: v for t, v in self.entries.items() if " " in t}


def load_lexicon(source, kind) -> Lexicon:
    kind = LexiconKind(kind)
    entries = {}
    for lineno, line in _lines(source):
        if kind is LexiconKind.SENTIMENT:
            term, sep, valence = line.rpartition("\t")
            if not sep:
                raise MissingFieldError("expected 'term<TAB>integer'", lineno)
            try:
                value = int(valence.strip())
            except ValueError:
                raise ParseError(f"valence {valence!r} is not an integer", lineno) from None
            if not -5 <= value <= 5:
                raise ValenceRangeError(f"valence {value} outside [-5, 5]", lineno)
            entries[term.strip().lower()] = value
        else:
            entries[line.strip().lower()] = 1
    return Lexicon(kind, entries)


# ---------------------------------------------------------------------------
# label manifests

LABEL_COLUMNS = ("session_id", "phq8", "gender", "split")


def parse_labels(source, delimiter=",") -> list[SessionRecord]:
    """Parse a ``session_id, phq8, gender, split`` manifest. ``phq8`` may be blank."""
    records = []
    seen = set()
    cols = dict(zip(LABEL_COLUMNS, range(4)))
    first = True
    for lineno, cells in _rows(source, delimiter):
        cells = [c.strip() for c in cells]
        if first:
            first = False
            if cells and cells[0].lower() == "session_id":
                lowered = [c.lower() for c in cells]
                missing = [c for c in LABEL_COLUMNS if c not in lowered]
                if missing:
                    raise MissingFieldError(f"manifest header lacks {missing}", lineno)
                cols = {c: lowered.index(c) for c in LABEL_COLUMNS}
                continue
        if len(cells) <= max(cols.values()):
            raise MissingFieldError(f"expected {len(LABEL_COLUMNS)} fields", lineno)
        sid = cells[cols["session_id"]]
        if not sid:
            raise MissingFieldError("empty session_id", lineno)
        if sid in seen:
            raise DuplicateIdError(f"duplicate session_id {sid!r}", lineno)
        seen.add(sid)
        raw = cells[cols["phq8"]]
        phq8 = None
        if raw:
            try:
                phq8 = int(raw)
            except ValueError:
                raise ParseError(f"phq8 {raw!r} is not an integer", lineno) from None
            if not 0 <= phq8 <= 24:
                raise LabelRangeError(f"phq8 {phq8} outside [0, 24]", lineno)
        try:
            gender = int(cells[cols["gender"]])
            split = Split(cells[cols["split"]].lower())
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if gender not in (0, 1):
            raise ParseError(f"gender {gender} not in {{0, 1}}", lineno)
        records.append(SessionRecord(sid, gender, phq8, split))
    return records


load_labels = parse_labels


def format_labels(records) -> str:
    lines = [",".join(LABEL_COLUMNS)]
    for r in records:
        phq8 = "" if r.phq8 is None else str(r.phq8)
        lines.append(f"{r.session_id},{phq8},{r.gender},{r.split.value}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# feature CSVs (one row per session, header = session_id + feature names)


def format_feature_csv(vectors, comment=None) -> str:
    vectors = list(vectors)
    out = io.StringIO()
    if comment:
        out.write(f"# {comment}\n")
    writer = csv.writer(out, lineterminator="\n")
    names = vectors[0].names if vectors else ()
    writer.writerow(("session_id",) + tuple(names))
    for fv in vectors:
        if fv.names != names:
            raise DepfusionError(f"feature names of {fv.session_id!r} differ from the first row")
        writer.writerow([fv.session_id] + [repr(float(v)) for v in fv.values])
    return out.getvalue()


def parse_feature_csv(source, modality) -> list[FeatureVector]:
    modality = Modality(modality)
    rows = _rows(source, ",")
    try:
        _, header = next(rows)
    except StopIteration:
        raise EmptyInputError("feature CSV is empty") from None
    if not header or header[0].strip() != "session_id":
        raise ParseError("feature CSV must start with a session_id column", 1)
    names = tuple(h.strip() for h in header[1:])
    vectors = []
    for lineno, cells in rows:
        if len(cells) != len(header):
            raise RaggedRowError(f"expected {len(header)} cells, got {len(cells)}", lineno)
        values = []
        for c in cells[1:]:
            try:
                values.append(float(c))
            except ValueError:
                raise NonNumericCellError(f"non-numeric cell {c!r}", lineno) from None
        vectors.append(FeatureVector(cells[0].strip(), modality, names, np.array(values)))
    return vectors
