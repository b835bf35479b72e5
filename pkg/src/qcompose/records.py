"""Line-delimited JSON record files.

Layout, one JSON object per line::

    {"kind": "header", "format": ..., "settings_hash": ..., "seed": ..., "set_label": ..., ...}
    {"kind": "record", "fen": ..., "classification": ..., ...}
    ...
    {"kind": "footer", "complete": true, "diagnostics": {...}, "error": null}

Only mate-class records are written, so the number of record lines in a file
is the composition quantity for that instance.  A file without a footer (or
with ``complete: false``) comes from an aborted instance; its records are
still valid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from .composer import CompositionRecord

FORMAT = "qcompose-records/1"

_RECORD_FIELDS = {f.name for f in fields(CompositionRecord)}


class RecordFormatError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


class RecordWriter:
    """Writes a header immediately and a footer on :meth:`close`.

    Each line is flushed as it is written so that a crashed worker still
    leaves a readable partial file behind.
    """

    def __init__(self, path, header: dict):
        self.path = Path(path)
        self._fh = open(self.path, "w", encoding="utf-8", newline="\n")
        self.count = 0
        self._write({"kind": "header", "format": FORMAT, **header})

    def _write(self, obj: dict) -> None:
        self._fh.write(dumps(obj) + "\n")
        self._fh.flush()

    def write(self, record: CompositionRecord) -> None:
        self._write({"kind": "record", **record.to_dict()})
        self.count += 1

    def close(self, *, complete: bool, diagnostics: Optional[dict] = None, error: Optional[str] = None) -> None:
        if self._fh.closed:
            return
        self._write({
            "kind": "footer",
            "complete": complete,
            "records": self.count,
            "diagnostics": dict(sorted((diagnostics or {}).items())),
            "error": error,
        })
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close(complete=True)
        else:
            self.close(complete=False, error=f"{exc_type.__name__}: {exc}")
        return False


@dataclass
class RecordFile:
    path: str
    header: dict
    records: list
    footer: Optional[dict] = None
    errors: list = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return bool(self.footer and self.footer.get("complete"))

    @property
    def set_label(self) -> str:
        return self.header.get("set_label", "")

    @property
    def instance_id(self) -> int:
        return int(self.header.get("instance_id", 0))


def read_record_file(path, *, permissive: bool = False) -> RecordFile:
    """Parse a record file.

    Malformed lines raise :class:`RecordFormatError` naming the line; with
    ``permissive=True`` they are collected in ``errors`` and skipped.
    """
    path = Path(path)
    header: Optional[dict] = None
    footer: Optional[dict] = None
    records: list = []
    errors: list = []

    def bad(lineno, message):
        err = RecordFormatError(path, lineno, message)
        if not permissive:
            raise err
        errors.append(str(err))

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                bad(lineno, f"not JSON ({exc.msg})")
                continue
            kind = obj.get("kind") if isinstance(obj, dict) else None
            if kind == "header":
                if lineno != 1:
                    bad(lineno, "header must be the first line")
                    continue
                if obj.get("format") != FORMAT:
                    bad(lineno, f"unsupported format {obj.get('format')!r}")
                header = obj
            elif kind == "record":
                if header is None:
                    bad(lineno, "record before header")
                    continue
                if footer is not None:
                    bad(lineno, "record after footer")
                    continue
                body = {k: v for k, v in obj.items() if k != "kind"}
                missing = _RECORD_FIELDS - body.keys()
                extra = body.keys() - _RECORD_FIELDS
                if missing or extra:
                    bad(lineno, f"record fields mismatch (missing {sorted(missing)}, unexpected {sorted(extra)})")
                    continue
                records.append(CompositionRecord.from_dict(body))
            elif kind == "footer":
                footer = obj
            else:
                bad(lineno, f"unknown line kind {kind!r}")
    if header is None:
        # a zero-length file is an instance that died before its header
        if path.stat().st_size:
            bad(1, "missing header line")
        header = {}
    return RecordFile(str(path), header, records, footer, errors)
