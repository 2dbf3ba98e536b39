"""Score file reading and writing.

Format: UTF-8 CSV, header ``enroll_demo,probe_demo,score,kind`` (names must
match exactly), optional ``split`` column holding ``dev``/``test``. ``kind``
is case-insensitive. Any other column is ignored with a warning.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .scores import DataWarning, Polarity, ScoreSet, SplitDataset, normalize_orientation

REQUIRED_COLUMNS = ("enroll_demo", "probe_demo", "score", "kind")
SPLIT_COLUMN = "split"
SPLITS = ("dev", "test")


class IngestError(Exception):
    """Base class for every input problem raised while reading score files."""


class EmptyFile(IngestError):
    def __init__(self, path):
        super().__init__(f"{path}: no data rows")
        self.path = path


class MalformedRow(IngestError):
    def __init__(self, line: int, reason: str, path=None):
        where = f"{path}:" if path is not None else ""
        super().__init__(f"{where}line {line}: {reason}")
        self.line = line
        self.reason = reason


class NonFiniteScore(MalformedRow):
    def __init__(self, line: int, value: str, path=None):
        super().__init__(line, f"non-finite score {value!r}", path)


class NoImpostorsInDev(IngestError):
    def __init__(self, path=None):
        super().__init__(f"{path or 'dev set'}: no impostor comparisons to calibrate thresholds on")


@dataclass(frozen=True)
class CsvConfig:
    """CSV dialect plus an optional partition filter.

    ``split`` selects rows whose ``split`` column equals the given value; it
    is required when reading one partition out of a combined file.
    """

    delimiter: str = ","
    split: str | None = None


def _parse_score(text: str, line: int, path) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise MalformedRow(line, f"score {text!r} is not a number", path) from None
    if not math.isfinite(value):
        raise NonFiniteScore(line, text, path)
    return value


def _read_header(reader, path) -> tuple[dict[str, int], bool]:
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyFile(path) from None
    positions = {name: i for i, name in enumerate(header)}
    missing = [c for c in REQUIRED_COLUMNS if c not in positions]
    if missing:
        raise MalformedRow(1, f"header lacks required column(s) {missing}; got {header}", path)
    extra = [c for c in header if c not in REQUIRED_COLUMNS and c != SPLIT_COLUMN]
    if extra:
        warnings.warn(f"{path}: ignoring unknown column(s) {extra}", DataWarning, stacklevel=3)
    return positions, SPLIT_COLUMN in positions


def read_scores(
    stream: Iterable[str],
    config: CsvConfig = CsvConfig(),
    polarity: Polarity | str = Polarity.SIMILARITY,
    path=None,
) -> ScoreSet:
    """Parse CSV text from an open stream. See :func:`load_scores`."""
    reader = csv.reader(stream, delimiter=config.delimiter)
    pos, has_split = _read_header(reader, path)
    if config.split is not None and not has_split:
        raise MalformedRow(1, f"split {config.split!r} requested but file has no 'split' column", path)
    i_e, i_p, i_s, i_k = (pos[c] for c in REQUIRED_COLUMNS)
    i_split = pos.get(SPLIT_COLUMN)
    width = max(pos.values()) + 1

    label_codes: dict[str, int] = {}
    enroll: list[int] = []
    probe: list[int] = []
    scores: list[float] = []
    genuine: list[bool] = []
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < width:
            raise MalformedRow(line, f"expected at least {width} fields, got {len(row)}", path)
        if i_split is not None:
            split = row[i_split].strip().lower()
            if split not in SPLITS:
                raise MalformedRow(line, f"split must be one of {SPLITS}, got {row[i_split]!r}", path)
            if config.split is not None and split != config.split:
                continue
        e, p = row[i_e].strip(), row[i_p].strip()
        if not e or not p:
            raise MalformedRow(line, "empty demographic label", path)
        kind = row[i_k].strip().lower()
        if kind == "genuine":
            is_genuine = True
        elif kind == "impostor":
            is_genuine = False
        else:
            raise MalformedRow(line, f"kind must be 'genuine' or 'impostor', got {row[i_k]!r}", path)
        if is_genuine and e != p:
            raise MalformedRow(line, f"genuine pair with mismatched demographics {e!r} vs {p!r}", path)
        score = _parse_score(row[i_s], line, path)
        enroll.append(label_codes.setdefault(e, len(label_codes)))
        probe.append(label_codes.setdefault(p, len(label_codes)))
        scores.append(score)
        genuine.append(is_genuine)

    if not scores:
        raise EmptyFile(path)

    # Remap first-seen codes to sorted label order.
    seen = sorted(label_codes, key=label_codes.get)
    labels = tuple(sorted(seen))
    remap = np.array([labels.index(label) for label in seen], dtype=np.int32)
    result = ScoreSet(
        labels=labels,
        enroll=remap[np.asarray(enroll, dtype=np.int32)],
        probe=remap[np.asarray(probe, dtype=np.int32)],
        scores=np.asarray(scores, dtype=np.float64),
        genuine=np.asarray(genuine, dtype=bool),
    )
    return normalize_orientation(result, polarity)


def load_scores(
    path,
    config: CsvConfig = CsvConfig(),
    polarity: Polarity | str = Polarity.SIMILARITY,
) -> ScoreSet:
    """Read a score CSV into a validated :class:`ScoreSet`.

    Row order is preserved. Distance-oriented files are negated so that
    ``score >= tau`` means accept.

    Raises:
        EmptyFile: the file has no header or no data rows.
        MalformedRow: a row does not parse (carries the 1-based line number).
        NonFiniteScore: a score is NaN or infinite.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return read_scores(fh, config, polarity, path)


def load_split(
    dev_path,
    test_path,
    config: CsvConfig = CsvConfig(),
    polarity: Polarity | str = Polarity.SIMILARITY,
) -> SplitDataset:
    """Load development and test partitions from two files.

    Raises:
        NoImpostorsInDev: the development file has no impostor rows.
    """
    dev = load_scores(dev_path, config, polarity)
    if dev.n_impostors == 0:
        raise NoImpostorsInDev(dev_path)
    test = load_scores(test_path, config, polarity)
    return SplitDataset(dev, test)


def load_partitioned(
    path,
    config: CsvConfig = CsvConfig(),
    polarity: Polarity | str = Polarity.SIMILARITY,
) -> SplitDataset:
    """Load both partitions from one file carrying a ``split`` column."""
    dev = load_scores(path, CsvConfig(config.delimiter, "dev"), polarity)
    if dev.n_impostors == 0:
        raise NoImpostorsInDev(path)
    test = load_scores(path, CsvConfig(config.delimiter, "test"), polarity)
    return SplitDataset(dev, test)


def format_scores(scores: ScoreSet, split: str | None = None) -> str:
    """Serialise to CSV text with round-trip float precision."""
    header = list(REQUIRED_COLUMNS) + ([SPLIT_COLUMN] if split else [])
    labels = scores.labels
    kinds = ("impostor", "genuine")
    extra = (split,) if split else ()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    # csv writes floats via repr, which round-trips exactly.
    writer.writerows(
        (labels[e], labels[p], s, kinds[g], *extra)
        for e, p, s, g in zip(scores.enroll.tolist(), scores.probe.tolist(),
                              scores.scores.tolist(), scores.genuine.tolist())
    )
    return buf.getvalue()


def write_scores(scores: ScoreSet, path, split: str | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(format_scores(scores, split))


def write_split(data: SplitDataset, dev_path, test_path) -> None:
    write_scores(data.dev, dev_path)
    write_scores(data.test, test_path)
