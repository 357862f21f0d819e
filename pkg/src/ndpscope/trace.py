"""Memory-trace data model, the DMV1 binary/text formats, and sharding.

A :class:`Trace` keeps its records in a packed numpy structured array whose
layout is byte-identical to a DMV1 record, so encoding and decoding are a
single ``tobytes`` / ``frombuffer`` away.
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from enum import IntEnum
from typing import BinaryIO, Iterable, Iterator, NamedTuple, Sequence

import numpy as np

MAGIC = b"DMV1"
VERSION = 1
HEADER = struct.Struct("<4sBBHQ")
HEADER_BYTES = HEADER.size  # 16

# Packed, little-endian; itemsize must stay 20.
RECORD_DTYPE = np.dtype(
    [
        ("addr", "<u8"),
        ("flags", "u1"),
        ("pad", "u1"),
        ("func_id", "<u2"),
        ("bb_id", "<u2"),
        ("alu_ops", "<u2"),
        ("instr_gap", "<u4"),
    ]
)
RECORD_BYTES = RECORD_DTYPE.itemsize
assert HEADER_BYTES == 16 and RECORD_BYTES == 20

WORD_SIZES = (4, 8)


class TraceError(Exception):
    """Base class for trace problems."""

    code = "TraceError"


class BadMagic(TraceError):
    code = "BadMagic"


class UnsupportedVersion(TraceError):
    code = "UnsupportedVersion"


class Truncated(TraceError):
    code = "Truncated"


class BadWordSize(TraceError):
    code = "BadWordSize"


class EmptyTrace(TraceError):
    code = "EmptyTrace"


class InvalidRecord(TraceError):
    code = "InvalidRecord"


class Overflow(TraceError):
    code = "Overflow"


class IoFailure(TraceError):
    code = "IoFailure"


class Kind(IntEnum):
    READ = 0
    WRITE = 1


class TraceRecord(NamedTuple):
    addr: int
    kind: Kind = Kind.READ
    func_id: int = 0
    bb_id: int = 0
    alu_ops: int = 0
    instr_gap: int = 1


@dataclass(frozen=True)
class TraceHeader:
    word_size_bytes: int = 8
    record_count: int = 0
    source_label: str = ""


@dataclass(frozen=True, eq=False)
class Trace:
    """An immutable, ordered sequence of memory references.

    ``records`` is a read-only structured array with dtype ``RECORD_DTYPE``.
    ``source_label`` is carried in memory only; DMV1 has no field for it.
    """

    header: TraceHeader
    records: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.records.dtype != RECORD_DTYPE:
            raise InvalidRecord(f"records must have dtype RECORD_DTYPE, got {self.records.dtype}")
        if self.header.word_size_bytes not in WORD_SIZES:
            raise BadWordSize(f"word size must be one of {WORD_SIZES}, got {self.header.word_size_bytes}")
        if self.header.record_count != len(self.records):
            raise InvalidRecord(
                f"header declares {self.header.record_count} records but {len(self.records)} present"
            )
        if len(self.records) and int(self.records["instr_gap"].min()) < 1:
            raise InvalidRecord("instr_gap must be >= 1 for every record")
        self.records.flags.writeable = False

    # construction helpers -------------------------------------------------

    @classmethod
    def from_arrays(
        cls,
        addr,
        *,
        write=None,
        func_id=0,
        bb_id=0,
        alu_ops=0,
        instr_gap=1,
        word_size: int = 8,
        source_label: str = "",
    ) -> "Trace":
        addr = np.asarray(addr)
        if addr.size and (np.issubdtype(addr.dtype, np.signedinteger) and addr.min() < 0):
            raise Overflow("negative address")
        rec = np.zeros(addr.shape[0], dtype=RECORD_DTYPE)
        rec["addr"] = addr
        if write is not None:
            rec["flags"] = np.asarray(write, dtype=bool).astype(np.uint8)
        rec["func_id"] = func_id
        rec["bb_id"] = bb_id
        rec["alu_ops"] = alu_ops
        rec["instr_gap"] = instr_gap
        return cls.from_records_array(rec, word_size=word_size, source_label=source_label)

    @classmethod
    def from_records_array(cls, rec: np.ndarray, word_size: int = 8, source_label: str = "") -> "Trace":
        return cls(TraceHeader(word_size, len(rec), source_label), rec)

    @classmethod
    def from_records(
        cls, records: Iterable[TraceRecord], word_size: int = 8, source_label: str = ""
    ) -> "Trace":
        rows = list(records)
        rec = np.zeros(len(rows), dtype=RECORD_DTYPE)
        for i, r in enumerate(rows):
            if r.instr_gap < 1:
                raise InvalidRecord(f"record {i}: instr_gap must be >= 1")
            rec[i] = (r.addr, int(r.kind), 0, r.func_id, r.bb_id, r.alu_ops, r.instr_gap)
        return cls.from_records_array(rec, word_size=word_size, source_label=source_label)

    # accessors ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TraceRecord]:
        for row in self.records.tolist():
            addr, flags, _pad, func_id, bb_id, alu_ops, instr_gap = row
            yield TraceRecord(addr, Kind(flags & 1), func_id, bb_id, alu_ops, instr_gap)

    def __getitem__(self, i: int) -> TraceRecord:
        addr, flags, _pad, func_id, bb_id, alu_ops, instr_gap = self.records[i].tolist()
        return TraceRecord(addr, Kind(flags & 1), func_id, bb_id, alu_ops, instr_gap)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.header.word_size_bytes == other.header.word_size_bytes
            and len(self) == len(other)
            and self.records.tobytes() == other.records.tobytes()
        )

    __hash__ = None

    @property
    def word_size(self) -> int:
        return self.header.word_size_bytes

    @property
    def addresses(self) -> np.ndarray:
        return self.records["addr"]

    @property
    def total_instructions(self) -> int:
        return int(self.records["instr_gap"].sum(dtype=np.uint64))

    def with_label(self, label: str) -> "Trace":
        return Trace(TraceHeader(self.word_size, len(self), label), self.records)


def concat(traces: Sequence[Trace], source_label: str = "") -> Trace:
    if not traces:
        raise EmptyTrace("nothing to concatenate")
    ws = {t.word_size for t in traces}
    if len(ws) != 1:
        raise BadWordSize(f"mixed word sizes {sorted(ws)}")
    rec = np.concatenate([t.records for t in traces])
    return Trace.from_records_array(rec, word_size=ws.pop(), source_label=source_label)


# DMV1 binary --------------------------------------------------------------


def encode(trace: Trace) -> bytes:
    head = HEADER.pack(MAGIC, VERSION, trace.word_size, 0, len(trace))
    return head + trace.records.tobytes()


def decode(data: bytes, source_label: str = "") -> Trace:
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic(f"not a DMV1 stream (magic {bytes(data[:4])!r})")
    if len(data) < HEADER_BYTES:
        raise Truncated(f"header needs {HEADER_BYTES} bytes, got {len(data)}")
    _magic, version, word_size, _reserved, count = HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersion(f"DMV1 version {version} not supported")
    if word_size not in WORD_SIZES:
        raise BadWordSize(f"word size {word_size} not in {WORD_SIZES}")
    body = len(data) - HEADER_BYTES
    if body != count * RECORD_BYTES:
        raise Truncated(
            f"header declares {count} records ({count * RECORD_BYTES} bytes), body holds {body} bytes"
        )
    rec = np.frombuffer(data, dtype=RECORD_DTYPE, count=count, offset=HEADER_BYTES).copy()
    if count and int(rec["instr_gap"].min()) < 1:
        raise InvalidRecord("record with instr_gap 0")
    return Trace.from_records_array(rec, word_size=word_size, source_label=source_label)


def read_trace(source: BinaryIO | bytes, source_label: str = "") -> Trace:
    """Decode a DMV1 stream (file object or bytes)."""
    data = source if isinstance(source, (bytes, bytearray, memoryview)) else source.read()
    return decode(bytes(data), source_label)


def write_trace(trace: Trace, sink: BinaryIO) -> None:
    try:
        sink.write(encode(trace))
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load(path, source_label: str | None = None) -> Trace:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return decode(data, str(path) if source_label is None else source_label)


def save(trace: Trace, path) -> None:
    try:
        with open(path, "wb") as fh:
            write_trace(trace, fh)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


# text format --------------------------------------------------------------


def read_text_trace(source: io.TextIOBase | str, word_size: int = 8, source_label: str = "") -> Trace:
    """Parse ``R|W <hex addr> <func_id> <bb_id> <alu_ops> <instr_gap>`` lines."""
    text = source if isinstance(source, str) else source.read()
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6 or parts[0] not in ("R", "W"):
            raise InvalidRecord(f"line {lineno}: expected 'R|W addr func bb alu gap', got {line!r}")
        try:
            addr = int(parts[1], 16)
            func_id, bb_id, alu_ops, instr_gap = (int(p) for p in parts[2:])
        except ValueError as exc:
            raise InvalidRecord(f"line {lineno}: {exc}") from None
        kind = Kind.WRITE if parts[0] == "W" else Kind.READ
        rows.append(TraceRecord(addr, kind, func_id, bb_id, alu_ops, instr_gap))
    return Trace.from_records(rows, word_size=word_size, source_label=source_label)


def write_text_trace(trace: Trace, sink: io.TextIOBase) -> None:
    for r in trace:
        kind = "W" if r.kind == Kind.WRITE else "R"
        sink.write(f"{kind} {r.addr:x} {r.func_id} {r.bb_id} {r.alu_ops} {r.instr_gap}\n")


# sharding -----------------------------------------------------------------


def shard_trace(trace: Trace, c: int, granularity: int = 1) -> list[Trace]:
    """Deal blocks of ``granularity`` records round-robin onto ``c`` traces.

    The trailing partial block goes to whichever core is next in deal order.
    """
    if c < 1 or granularity < 1:
        raise ValueError("core count and granularity must be >= 1")
    if c == 1:
        return [trace]
    block = np.arange(len(trace)) // granularity
    owner = block % c
    label = trace.header.source_label
    return [
        Trace.from_records_array(trace.records[owner == i], trace.word_size, f"{label}#shard{i}/{c}")
        for i in range(c)
    ]
