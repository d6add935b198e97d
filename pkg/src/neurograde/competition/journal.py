"""Append-only journal: crash-safe persistence for the competition engine.

File layout:

    8-byte header   magic b"NGJR", version byte, three zero bytes
    records         u32 length | u32 crc32(payload) | payload (UTF-8 JSON)

Both integers are little-endian.  Appends go to the end of the file and are
flushed immediately, so an interrupted write can only damage the final
record.  Recovery therefore reads records until the first defect: a defect
that touches the end of the file is a torn write and is silently truncated
away, while a defect with intact data after it means real corruption and
raises RecoveryError with the record's byte offset.

Opening a journal for writing takes an exclusive OS-level lock; a second
writer on the same path is refused.
"""

from __future__ import annotations

import fcntl
import json
import os
import struct
import zlib
from pathlib import Path

from ..errors import ConfigError, RecoveryError

__all__ = ["Journal", "read_journal"]

MAGIC = b"NGJR"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sB3x")
_PREFIX = struct.Struct("<II")


def _scan(data: bytes, path_name: str):
    """Parse journal bytes into (records, valid_end).

    `records` is a list of (offset, payload-dict).  `valid_end` is the file
    offset after the last intact record; anything beyond it is a torn tail
    that the writer may truncate.
    """
    size = len(data)
    if size == 0:
        return [], 0
    if size < _HEADER.size:
        # Torn header: nothing readable was ever committed.
        return [], 0
    magic, version = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise RecoveryError(f"{path_name} is not a journal file", offset=0)
    if version != FORMAT_VERSION:
        raise RecoveryError(
            f"{path_name} has unsupported journal version {version}", offset=0
        )
    records = []
    offset = _HEADER.size
    while offset < size:
        if offset + _PREFIX.size > size:
            break  # torn length/crc prefix
        length, crc = _PREFIX.unpack_from(data, offset)
        start = offset + _PREFIX.size
        end = start + length
        if end > size:
            break  # torn payload
        payload = data[start:end]
        if zlib.crc32(payload) != crc:
            if end == size:
                break  # torn final record: checksum never completed
            raise RecoveryError(
                f"{path_name} record checksum mismatch", offset=offset
            )
        try:
            record = json.loads(payload.decode("utf-8"))
        except (UnicodeDecodeError, ValueError) as exc:
            if end == size:
                break
            raise RecoveryError(
                f"{path_name} record is not valid JSON: {exc}", offset=offset
            ) from exc
        records.append((offset, record))
        offset = end
    return records, offset


def read_journal(path):
    """Read all intact records from a journal without taking the lock."""
    path = Path(path)
    if not path.exists():
        return []
    records, _ = _scan(path.read_bytes(), path.name)
    return [payload for _, payload in records]


class Journal:
    """Exclusive-writer journal handle.

    Construction recovers existing records (available as `.records`),
    truncates any torn tail, and locks the file for appending.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        existing = self.path.read_bytes() if self.path.exists() else b""
        records, valid_end = _scan(existing, self.path.name)
        self.entries = records  # list of (byte offset, payload)
        self.records = [payload for _, payload in records]
        self._fh = open(self.path, "a+b")
        try:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError as exc:
            self._fh.close()
            raise ConfigError(
                f"journal {self.path.name} is already open for writing"
            ) from exc
        if valid_end == 0:
            self._fh.truncate(0)
            self._fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION))
        elif valid_end < len(existing):
            self._fh.truncate(valid_end)
        self._fh.flush()

    def append(self, payload: dict) -> None:
        """Serialize one record and append it durably."""
        raw = json.dumps(
            payload, separators=(",", ":"), sort_keys=True, ensure_ascii=False
        ).encode("utf-8")
        self._fh.write(_PREFIX.pack(len(raw), zlib.crc32(raw)))
        self._fh.write(raw)
        self._fh.flush()

    def sync(self) -> None:
        """Force written records to stable storage."""
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.flush()
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_UN)
            self._fh.close()

    def __enter__(self) -> "Journal":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
