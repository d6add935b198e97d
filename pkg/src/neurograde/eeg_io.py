"""Recording ingest, montage derivation, labels, and subject-level splits.

Two signal formats are supported: EDF (256-byte ASCII global header, one
256-byte subheader per signal, 2-byte little-endian integer samples) and a
plain CSV with one column per channel plus a JSON sidecar carrying the
sampling rate and subject id. Montages subtract a cathode channel from an
anode channel; dataset splits are made at subject granularity so no newborn
contributes epochs to both sides.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import LabelError, MontageError, ParseError, SplitError, UnsupportedFormat

ANNOTATION_LABEL = "EDF Annotations"

# global header field layout: (name, offset, width)
_GLOBAL_FIELDS = (
    ("version", 0, 8),
    ("patient_id", 8, 80),
    ("recording_id", 88, 80),
    ("start_date", 168, 8),
    ("start_time", 176, 8),
    ("header_bytes", 184, 8),
    ("reserved", 192, 44),
    ("n_records", 236, 8),
    ("record_duration", 244, 8),
    ("n_signals", 252, 4),
)

# per-signal field blocks: (name, block offset factor, width)
_SIGNAL_FIELDS = (
    ("label", 0, 16),
    ("transducer", 16, 80),
    ("dimension", 96, 8),
    ("phys_min", 104, 8),
    ("phys_max", 112, 8),
    ("dig_min", 120, 8),
    ("dig_max", 128, 8),
    ("prefilter", 136, 80),
    ("samples_per_record", 216, 8),
    ("reserved", 224, 32),
)


@dataclass(frozen=True)
class EdfMeta:
    """Raw layout of a parsed EDF file, kept for byte-identical rewriting."""

    header: bytes
    digital: tuple[np.ndarray, ...]  # int16 stream per signal, file order
    samples_per_record: tuple[int, ...]
    n_records: int
    record_duration: float
    data_indices: tuple[int, ...]  # positions of non-annotation signals


@dataclass(frozen=True)
class Recording:
    """Multichannel signal in microvolts with unique channel labels."""

    channel_labels: tuple[str, ...]
    fs: float
    samples: np.ndarray  # (channels, n) float64, read-only
    subject_id: str = ""
    start_offset: float | None = None
    edf_meta: EdfMeta | None = None

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 2:
            raise ParseError(f"samples must be 2-D (channels, n), got shape {arr.shape}")
        if arr.shape[0] != len(self.channel_labels):
            raise ParseError(
                f"{len(self.channel_labels)} labels for {arr.shape[0]} sample rows"
            )
        if len(set(self.channel_labels)) != len(self.channel_labels):
            raise ParseError("channel labels must be unique")
        if self.fs <= 0:
            raise ParseError(f"sampling rate must be positive, got {self.fs}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "channel_labels", tuple(self.channel_labels))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.fs

    def channel(self, label: str) -> np.ndarray:
        try:
            idx = self.channel_labels.index(label)
        except ValueError:
            raise MontageError(f"channel {label!r} not present") from None
        return self.samples[idx]


# --- EDF ----------------------------------------------------------------------


def _ascii_field(data: bytes, offset: int, width: int, name: str) -> str:
    raw = data[offset : offset + width]
    try:
        return raw.decode("ascii")
    except UnicodeDecodeError:
        raise ParseError(f"non-ASCII bytes in EDF field {name}", offset=offset) from None


def _int_field(data: bytes, offset: int, width: int, name: str) -> int:
    text = _ascii_field(data, offset, width, name).strip()
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"EDF field {name} is not an integer: {text!r}", offset=offset) from None


def _float_field(data: bytes, offset: int, width: int, name: str) -> float:
    text = _ascii_field(data, offset, width, name).strip()
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"EDF field {name} is not numeric: {text!r}", offset=offset) from None


def read_edf(path) -> Recording:
    """Parse an EDF file into physical units (µV).

    Annotation signals are carried through for rewriting but excluded from
    the returned channels. The raw header and digital samples are retained
    so write_edf can reproduce the file byte for byte.
    """
    data = Path(path).read_bytes()
    if len(data) < 256:
        raise ParseError("truncated EDF global header", offset=len(data))

    reserved = _ascii_field(data, 192, 44, "reserved") if data[192:236].isascii() else ""
    if data[0] == 0xFF or reserved.startswith("24BIT"):
        raise UnsupportedFormat("24-bit BDF sample width is not supported")
    version = _ascii_field(data, 0, 8, "version")
    if version.strip() != "0":
        raise ParseError(f"unsupported EDF version {version.strip()!r}", offset=0)

    header_bytes = _int_field(data, 184, 8, "header_bytes")
    n_records = _int_field(data, 236, 8, "n_records")
    record_duration = _float_field(data, 244, 8, "record_duration")
    ns = _int_field(data, 252, 4, "n_signals")
    if ns <= 0:
        raise ParseError(f"signal count must be positive, got {ns}", offset=252)
    if header_bytes != 256 * (ns + 1):
        raise ParseError(
            f"header size field says {header_bytes}, expected {256 * (ns + 1)}", offset=184
        )
    if len(data) < header_bytes:
        raise ParseError("truncated EDF signal headers", offset=len(data))
    if n_records < 0:
        raise ParseError(f"record count must be nonnegative, got {n_records}", offset=236)
    if record_duration <= 0:
        raise ParseError(
            f"record duration must be positive, got {record_duration}", offset=244
        )

    def sig_offset(block: int, width: int, i: int) -> int:
        return 256 + block * ns + i * width

    labels, phys_min, phys_max, dig_min, dig_max, spr = [], [], [], [], [], []
    for i in range(ns):
        labels.append(_ascii_field(data, sig_offset(0, 16, i), 16, f"label[{i}]").strip())
        phys_min.append(_float_field(data, sig_offset(104, 8, i), 8, f"phys_min[{i}]"))
        phys_max.append(_float_field(data, sig_offset(112, 8, i), 8, f"phys_max[{i}]"))
        dig_min.append(_int_field(data, sig_offset(120, 8, i), 8, f"dig_min[{i}]"))
        dig_max.append(_int_field(data, sig_offset(128, 8, i), 8, f"dig_max[{i}]"))
        n = _int_field(data, sig_offset(216, 8, i), 8, f"samples_per_record[{i}]")
        if n <= 0:
            raise ParseError(
                f"samples per record must be positive, got {n}", offset=sig_offset(216, 8, i)
            )
        spr.append(n)
        if dig_max[i] == dig_min[i]:
            raise ParseError(
                f"signal {i} has equal digital min and max", offset=sig_offset(128, 8, i)
            )

    record_width = sum(spr)
    expected = header_bytes + n_records * record_width * 2
    if len(data) != expected:
        raise ParseError(
            f"file is {len(data)} bytes, layout requires {expected}",
            offset=min(len(data), expected),
        )

    flat = np.frombuffer(data, dtype="<i2", offset=header_bytes)
    table = flat.reshape(n_records, record_width) if n_records else flat.reshape(0, record_width)
    digital = []
    col = 0
    for n in spr:
        digital.append(np.ascontiguousarray(table[:, col : col + n]).reshape(-1))
        col += n

    data_indices = tuple(i for i in range(ns) if labels[i] != ANNOTATION_LABEL)
    if not data_indices:
        raise UnsupportedFormat("no signal channels (annotations only)")
    rates = {spr[i] / record_duration for i in data_indices}
    if len(rates) > 1:
        raise UnsupportedFormat(f"mixed sampling rates not supported: {sorted(rates)}")
    fs = rates.pop()

    channels = []
    for i in data_indices:
        gain = (phys_max[i] - phys_min[i]) / (dig_max[i] - dig_min[i])
        channels.append((digital[i].astype(np.float64) - dig_min[i]) * gain + phys_min[i])

    meta = EdfMeta(
        header=data[:header_bytes],
        digital=tuple(digital),
        samples_per_record=tuple(spr),
        n_records=n_records,
        record_duration=record_duration,
        data_indices=data_indices,
    )
    subject = _ascii_field(data, 8, 80, "patient_id").strip() or Path(path).stem
    return Recording(
        channel_labels=tuple(labels[i] for i in data_indices),
        fs=fs,
        samples=np.vstack(channels),
        subject_id=subject,
        edf_meta=meta,
    )


def _pad(text: str, width: int) -> bytes:
    raw = text.encode("ascii")
    if len(raw) > width:
        raise ParseError(f"EDF field value {text!r} longer than {width} bytes")
    return raw.ljust(width)


def _num_field(value: float, width: int = 8) -> bytes:
    if value == int(value):
        text = str(int(value))
    else:
        text = f"{value:.10g}"
        if len(text) > width:
            text = f"{value:.{width - len(str(int(value))) - 2}f}"[:width]
    return _pad(text, width)


def write_edf(rec: Recording, path) -> None:
    """Serialize a Recording as EDF.

    A recording parsed from EDF is rewritten byte-identically from its
    retained layout. Recordings from other sources are quantized to the
    full int16 range with per-channel calibration over +/- max amplitude.
    """
    path = Path(path)
    if rec.edf_meta is not None:
        m = rec.edf_meta
        blocks = [m.header]
        table = np.empty((m.n_records, sum(m.samples_per_record)), dtype="<i2")
        col = 0
        for sig, n in zip(m.digital, m.samples_per_record):
            table[:, col : col + n] = sig.reshape(m.n_records, n)
            col += n
        blocks.append(table.tobytes())
        path.write_bytes(b"".join(blocks))
        return

    if rec.fs != int(rec.fs):
        raise UnsupportedFormat(f"EDF needs an integer sampling rate, got {rec.fs}")
    spr = int(rec.fs)
    n = rec.n_samples
    n_records = math.ceil(n / spr)
    ns = len(rec.channel_labels)

    dig_min, dig_max = -32768, 32767
    phys_bounds = []
    quantized = np.empty((ns, n_records * spr), dtype="<i2")
    for k in range(ns):
        x = rec.samples[k]
        bound = float(np.max(np.abs(x))) if n else 1.0
        bound = max(math.ceil(bound), 1)
        phys_bounds.append(bound)
        padded = np.zeros(n_records * spr)
        padded[:n] = x
        gain = (dig_max - dig_min) / (2 * bound)
        quantized[k] = np.round((padded + bound) * gain + dig_min).astype("<i2")

    head = b"".join(
        [
            _pad("0", 8),
            _pad(rec.subject_id, 80),
            _pad("", 80),
            _pad("01.01.00", 8),
            _pad("00.00.00", 8),
            _num_field(256 * (ns + 1)),
            _pad("", 44),
            _num_field(n_records),
            _num_field(1),
            _pad(str(ns), 4),
        ]
    )
    cols = [
        b"".join(_pad(lbl, 16) for lbl in rec.channel_labels),
        b"".join(_pad("", 80) for _ in range(ns)),
        b"".join(_pad("uV", 8) for _ in range(ns)),
        b"".join(_num_field(-b) for b in phys_bounds),
        b"".join(_num_field(b) for b in phys_bounds),
        b"".join(_num_field(dig_min) for _ in range(ns)),
        b"".join(_num_field(dig_max) for _ in range(ns)),
        b"".join(_pad("", 80) for _ in range(ns)),
        b"".join(_num_field(spr) for _ in range(ns)),
        b"".join(_pad("", 32) for _ in range(ns)),
    ]
    table = np.empty((n_records, ns * spr), dtype="<i2")
    for k in range(ns):
        table[:, k * spr : (k + 1) * spr] = quantized[k].reshape(n_records, spr)
    path.write_bytes(head + b"".join(cols) + table.tobytes())


# --- CSV signal format ---------------------------------------------------------


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json")


def read_signal_csv(path) -> Recording:
    """Read a one-column-per-channel CSV with a JSON sidecar for fs/subject."""
    path = Path(path)
    sidecar = _sidecar_path(path)
    if not sidecar.exists():
        raise ParseError(f"missing sidecar {sidecar.name} next to {path.name}")
    try:
        meta = json.loads(sidecar.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid sidecar JSON: {exc}") from None
    if "fs" not in meta:
        raise ParseError(f"sidecar {sidecar.name} lacks an fs entry")

    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path.name} is empty") from None
    labels = [h.strip() for h in header]
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"bad numeric data in {path.name}: {exc}") from None
    if table.shape[1] != len(labels):
        raise ParseError(
            f"{path.name} has {table.shape[1]} columns for {len(labels)} header labels"
        )
    return Recording(
        channel_labels=tuple(labels),
        fs=float(meta["fs"]),
        samples=table.T,
        subject_id=str(meta.get("subject_id", path.stem)),
        start_offset=meta.get("start_offset"),
    )


def write_signal_csv(rec: Recording, path) -> None:
    path = Path(path)
    header = ",".join(rec.channel_labels)
    np.savetxt(path, rec.samples.T, delimiter=",", header=header, comments="", fmt="%.6f")
    sidecar = {"fs": rec.fs, "subject_id": rec.subject_id}
    if rec.start_offset is not None:
        sidecar["start_offset"] = rec.start_offset
    _sidecar_path(path).write_text(json.dumps(sidecar))


def read_recording(path) -> Recording:
    """Dispatch on extension: .edf binary or .csv with sidecar."""
    path = Path(path)
    if path.suffix.lower() == ".edf":
        return read_edf(path)
    if path.suffix.lower() == ".csv":
        return read_signal_csv(path)
    raise UnsupportedFormat(f"unknown recording format {path.suffix!r}")


# --- montages ------------------------------------------------------------------


@dataclass(frozen=True)
class MontageSpec:
    """Ordered anode/cathode pairs; 'A/B' labels try A first, then B."""

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((a, c) for a, c in self.pairs))


#: 4-channel montage used for segment-level grading input.
MONTAGE_BIPOLAR4 = MontageSpec((("F3", "C3"), ("F4", "C4"), ("T3", "O1/P3"), ("T4", "O2/P4")))
#: 8-channel montage used for feature extraction (pair list kept as published).
MONTAGE_BIPOLAR8 = MontageSpec(
    (
        ("F3", "C4"),
        ("F3", "C3"),
        ("C4", "T4"),
        ("C3", "T3"),
        ("C4", "Cz"),
        ("Cz", "C3"),
        ("C4", "O2/P4"),
        ("C3", "O1/P3"),
    )
)
#: 3-channel montage feeding the image encoder.
MONTAGE_GASF3 = MontageSpec((("F4", "C4"), ("F3", "C3"), ("C4", "T4")))

MONTAGES: dict[str, MontageSpec] = {
    "bipolar4": MONTAGE_BIPOLAR4,
    "bipolar8": MONTAGE_BIPOLAR8,
    "gasf3": MONTAGE_GASF3,
}


def _resolve_label(rec: Recording, label: str) -> str:
    for candidate in label.split("/"):
        if candidate in rec.channel_labels:
            return candidate
    raise MontageError(f"channel {label!r} not present in recording")


def derive_montage(rec: Recording, spec: MontageSpec) -> Recording:
    """Bipolar derivation: each output channel is anode minus cathode."""
    labels, rows = [], []
    for anode, cathode in spec.pairs:
        a = _resolve_label(rec, anode)
        c = _resolve_label(rec, cathode)
        labels.append(f"{a}-{c}")
        rows.append(rec.channel(a) - rec.channel(c))
    return Recording(
        channel_labels=tuple(labels),
        fs=rec.fs,
        samples=np.vstack(rows),
        subject_id=rec.subject_id,
        start_offset=rec.start_offset,
    )


# --- labels and epochs ----------------------------------------------------------


@dataclass(frozen=True)
class LabelRow:
    epoch_id: str
    subject_id: str
    grade: int


def load_label_rows(path) -> list[LabelRow]:
    """Parse `epoch_id,subject_id,grade` rows, validating grades and duplicates."""
    path = Path(path)
    rows: list[LabelRow] = []
    seen: set[str] = set()
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise LabelError(f"{path.name} is empty") from None
        if header != ["epoch_id", "subject_id", "grade"]:
            raise LabelError(
                f"expected header epoch_id,subject_id,grade, got {','.join(header)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise LabelError(f"line {lineno}: expected 3 fields, got {len(row)}")
            epoch_id, subject_id, grade_text = (cell.strip() for cell in row)
            try:
                grade = int(grade_text)
            except ValueError:
                raise LabelError(f"line {lineno}: grade {grade_text!r} is not an integer") from None
            if grade not in (1, 2, 3, 4):
                raise LabelError(f"line {lineno}: grade {grade} outside 1-4")
            if epoch_id in seen:
                raise LabelError(f"line {lineno}: duplicate epoch_id {epoch_id!r}")
            seen.add(epoch_id)
            rows.append(LabelRow(epoch_id, subject_id, grade))
    return rows


def load_labels(path) -> dict[str, int]:
    return {row.epoch_id: row.grade for row in load_label_rows(path)}


@dataclass(frozen=True)
class GradedEpoch:
    """A one-hour recording with an optional expert grade."""

    epoch_id: str
    subject_id: str
    recording: Recording
    grade: int | None = None

    def __post_init__(self):
        if self.grade is not None and self.grade not in (1, 2, 3, 4):
            raise LabelError(f"grade {self.grade} outside 1-4")


def extract_epoch(rec: Recording, start_s: float, duration_s: float = 3600.0) -> Recording:
    """Slice a window out of a longer recording."""
    i0 = int(round(start_s * rec.fs))
    i1 = i0 + int(round(duration_s * rec.fs))
    if i0 < 0 or i1 > rec.n_samples:
        raise ParseError(
            f"window {start_s}s+{duration_s}s outside recording of {rec.duration:.1f}s"
        )
    return Recording(
        channel_labels=rec.channel_labels,
        fs=rec.fs,
        samples=rec.samples[:, i0:i1],
        subject_id=rec.subject_id,
        start_offset=(rec.start_offset or 0.0) + start_s,
    )


def load_epoch_dir(signal_dir, labels_path=None) -> list[GradedEpoch]:
    """Assemble epochs from a directory of signal files plus an optional label CSV.

    The file stem is the epoch id. Grades come from the label CSV when given;
    files without a label stay ungraded.
    """
    signal_dir = Path(signal_dir)
    labels: dict[str, LabelRow] = {}
    skip = None
    if labels_path is not None:
        labels = {row.epoch_id: row for row in load_label_rows(labels_path)}
        skip = Path(labels_path).resolve()
    epochs = []
    paths = sorted(
        p
        for p in signal_dir.iterdir()
        if p.suffix.lower() in (".edf", ".csv") and p.resolve() != skip
    )
    for p in paths:
        rec = read_recording(p)
        row = labels.get(p.stem)
        subject = row.subject_id if row is not None else rec.subject_id
        epochs.append(
            GradedEpoch(
                epoch_id=p.stem,
                subject_id=subject,
                recording=rec,
                grade=row.grade if row is not None else None,
            )
        )
    return epochs


# --- splits ---------------------------------------------------------------------


@dataclass(frozen=True)
class DatasetSplit:
    train: frozenset[str]
    test: frozenset[str]
    seed: int

    def __post_init__(self):
        if self.train & self.test:
            raise SplitError("train and test epoch sets overlap")


def split_by_subject(epochs, train_fraction: float, seed: int) -> DatasetSplit:
    """Partition epochs at subject granularity, deterministically per seed.

    Subjects are shuffled with the seed and moved into the train side until
    the epoch count reaches the target fraction; at least one subject always
    stays on each side.
    """
    if not (0 < train_fraction < 1):
        raise SplitError(f"train fraction must be in (0, 1), got {train_fraction}")
    by_subject: dict[str, list[str]] = {}
    for ep in epochs:
        by_subject.setdefault(ep.subject_id, []).append(ep.epoch_id)
    if len(by_subject) < 2:
        raise SplitError(f"need at least 2 subjects to split, got {len(by_subject)}")

    subjects = sorted(by_subject)
    random.Random(seed).shuffle(subjects)
    total = sum(len(v) for v in by_subject.values())
    target = train_fraction * total

    train_ids: set[str] = set()
    count = 0
    for pos, subject in enumerate(subjects):
        remaining = len(subjects) - pos
        if count >= target or remaining == 1:
            break
        train_ids.update(by_subject[subject])
        count += len(by_subject[subject])
    test_ids = {eid for s in subjects for eid in by_subject[s]} - train_ids
    return DatasetSplit(train=frozenset(train_ids), test=frozenset(test_ids), seed=seed)
