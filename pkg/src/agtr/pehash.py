"""PE metadata hashing and AGTR construction for malware corpora.

The digest covers coarse features of the COFF header, optional header and
every section header, in the spirit of peHash.  Samples with equal digests
are grouped together; anything that fails to parse becomes a singleton.

Features (all packed as unsigned big-endian integers):

* file characteristics (16 bit), subsystem (16 bit)
* floor(log2) of SizeOfStackCommit and SizeOfHeapCommit (8 bit each)
* per section, in section-table order: floor(log2) of VirtualAddress and of
  SizeOfRawData, the 32-bit section flags XOR-folded to 8 bits, and the byte
  entropy of the raw section data (bits * 32, floored, capped at 255)

The entropy bucket stands in for the compression-ratio feature of the
original peHash because it does not depend on a compressor implementation.
Digests are therefore not interchangeable with other peHash tools.
"""

from __future__ import annotations

import hashlib
import math
import os
import struct
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from agtr.core import SINGLETON_PREFIX, Clustering, build_clustering

MAX_SECTIONS = 96
PE32_MAGIC = 0x10B
PE32PLUS_MAGIC = 0x20B
SECTION_HEADER_SIZE = 40


class PeParseError(ValueError):
    """Base class; the class name doubles as the status string in digest CSVs."""


class MissingMzMagic(PeParseError):
    pass


class BadPeOffset(PeParseError):
    pass


class MissingPeSignature(PeParseError):
    pass


class TruncatedHeaders(PeParseError):
    pass


class UnknownOptionalHeaderMagic(PeParseError):
    pass


class SectionCountExceeded(PeParseError):
    pass


class SectionOutOfBounds(PeParseError):
    pass


def log2_bucket(value: int) -> int:
    """floor(log2(max(value, 1))) clipped to [0, 63]."""
    return min(max(int(value), 1).bit_length() - 1, 63)


def xor_fold32(value: int) -> int:
    value &= 0xFFFFFFFF
    return (value ^ (value >> 8) ^ (value >> 16) ^ (value >> 24)) & 0xFF


def entropy_bucket(data: bytes) -> int:
    """First-order byte entropy in bits, times 32, floored, capped at 255."""
    n = len(data)
    if n == 0:
        return 0
    counts = np.bincount(np.frombuffer(data, dtype=np.uint8), minlength=256).tolist()
    # plain-float sum in byte-value order keeps the result identical everywhere
    h = -sum(c / n * math.log2(c / n) for c in counts if c)
    # the 1e-9 nudge keeps exact values such as 1.0 bit from flooring to 31
    return min(int(math.floor(h * 32 + 1e-9)), 255)


@dataclass(frozen=True)
class SectionFeature:
    vaddr_log2: int
    raw_size_log2: int
    characteristics_folded: int
    entropy_bucket: int


@dataclass(frozen=True)
class PeMetadata:
    characteristics: int
    subsystem: int
    stack_commit_log2: int
    heap_commit_log2: int
    sections: tuple

    def pack(self) -> bytes:
        out = bytearray(struct.pack(">HHBB", self.characteristics, self.subsystem,
                                    self.stack_commit_log2, self.heap_commit_log2))
        for s in self.sections:
            out += struct.pack(">BBBB", s.vaddr_log2, s.raw_size_log2, s.characteristics_folded, s.entropy_bucket)
        return bytes(out)


def _need(data: bytes, end: int, what: str) -> None:
    if end > len(data):
        raise TruncatedHeaders(f"file ends before {what} (need {end} bytes, have {len(data)})")


def parse_pe(data: bytes) -> PeMetadata:
    """Extract the hashed metadata from raw PE bytes.

    Raises a :class:`PeParseError` subclass naming the first structural
    problem found.  Nothing in the file is executed or relocated.
    """
    data = bytes(data)
    if not data:
        raise TruncatedHeaders("empty file")
    if data[:2] != b"MZ"[: len(data)]:
        raise MissingMzMagic("no MZ signature")
    _need(data, 0x40, "DOS header")
    (e_lfanew,) = struct.unpack_from("<I", data, 0x3C)
    if e_lfanew >= len(data):
        raise BadPeOffset(f"e_lfanew {e_lfanew:#x} beyond end of file ({len(data)} bytes)")
    _need(data, e_lfanew + 4, "PE signature")
    if data[e_lfanew:e_lfanew + 4] != b"PE\0\0":
        raise MissingPeSignature(f"no PE signature at {e_lfanew:#x}")

    coff = e_lfanew + 4
    _need(data, coff + 20, "COFF header")
    _machine, n_sections, _ts, _symtab, _nsyms, opt_size, characteristics = struct.unpack_from("<HHIIIHH", data, coff)
    if n_sections > MAX_SECTIONS:
        raise SectionCountExceeded(f"{n_sections} sections (limit {MAX_SECTIONS})")

    opt = coff + 20
    _need(data, opt + 2, "optional header magic")
    (magic,) = struct.unpack_from("<H", data, opt)
    # (end of fields we read, integer format, SizeOfStackCommit offset, SizeOfHeapCommit offset)
    if magic == PE32_MAGIC:
        fields_end, fmt, stack_off, heap_off = 88, "<I", 76, 84
    elif magic == PE32PLUS_MAGIC:
        fields_end, fmt, stack_off, heap_off = 104, "<Q", 80, 96
    else:
        raise UnknownOptionalHeaderMagic(f"optional header magic {magic:#x}")
    if opt_size < fields_end:
        raise TruncatedHeaders(f"SizeOfOptionalHeader {opt_size} too small for magic {magic:#x}")
    _need(data, opt + fields_end, "optional header")
    (subsystem,) = struct.unpack_from("<H", data, opt + 68)
    (stack_commit,) = struct.unpack_from(fmt, data, opt + stack_off)
    (heap_commit,) = struct.unpack_from(fmt, data, opt + heap_off)

    table = opt + opt_size
    _need(data, table + n_sections * SECTION_HEADER_SIZE, "section table")
    sections = []
    for i in range(n_sections):
        base = table + i * SECTION_HEADER_SIZE
        _vsize, vaddr, raw_size, raw_ptr = struct.unpack_from("<IIII", data, base + 8)
        (flags,) = struct.unpack_from("<I", data, base + 36)
        if raw_size and raw_ptr + raw_size > len(data):
            raise SectionOutOfBounds(f"section {i} raw data {raw_ptr:#x}+{raw_size:#x} beyond end of file")
        raw = data[raw_ptr:raw_ptr + raw_size] if raw_size else b""
        sections.append(SectionFeature(log2_bucket(vaddr), log2_bucket(raw_size), xor_fold32(flags), entropy_bucket(raw)))
    return PeMetadata(
        characteristics=characteristics,
        subsystem=subsystem,
        stack_commit_log2=log2_bucket(stack_commit),
        heap_commit_log2=log2_bucket(heap_commit),
        sections=tuple(sections),
    )


def pehash_digest(meta: PeMetadata) -> str:
    return hashlib.sha256(meta.pack()).hexdigest()


def digest_bytes(data: bytes) -> tuple[Optional[str], str]:
    """``(digest, "ok")`` or ``(None, error_class_name)``."""
    try:
        return pehash_digest(parse_pe(data)), "ok"
    except PeParseError as exc:
        return None, type(exc).__name__


def digest_file(path) -> tuple[Optional[str], str]:
    with open(path, "rb") as fh:
        return digest_bytes(fh.read())


def iter_files(paths: Iterable) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(f for f in p.rglob("*") if f.is_file()))
        else:
            out.append(p)
    return out


def scan(paths: Iterable, jobs: int = 1, id_mode: str = "path") -> list[tuple[str, Optional[str], str]]:
    """Digest every file under ``paths``; rows ``(sample_id, digest, status)`` sorted by id.

    ``id_mode`` is ``"path"`` (the path as given/found) or ``"sha256"`` (file content hash).
    """
    files = iter_files(paths)
    if jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan_one, files, [id_mode] * len(files), chunksize=16))
    else:
        results = [_scan_one(f, id_mode) for f in files]
    # identical content scanned twice under sha256 ids is one sample
    return sorted(set(results), key=lambda row: row[0])


def _scan_one(path: Path, id_mode: str):
    data = path.read_bytes()
    sid = hashlib.sha256(data).hexdigest() if id_mode == "sha256" else path.as_posix()
    digest, status = digest_bytes(data)
    return sid, digest, status


def build_agtr(digests: Iterable[tuple]) -> Clustering:
    """Group ``(sample_id, digest_or_None)`` pairs by digest; missing digests become singletons."""

    def pairs():
        for sid, digest in digests:
            yield sid, digest if digest else SINGLETON_PREFIX + str(sid)

    return build_clustering(pairs())


def default_jobs() -> int:
    return max(1, (os.cpu_count() or 1))
