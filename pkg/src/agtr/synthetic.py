"""Synthetic inputs: random and planted clusterings, and a minimal PE builder.

Used by the test-suite, the acceptance checks and the benchmark command.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from agtr.core import Clustering
from agtr.refinement import perturb, random_refinement


def sample_ids(m: int, prefix: str = "s") -> tuple:
    return tuple(f"{prefix}{i}" for i in range(m))


def random_clustering(m: int, k: int, seed, ids: tuple | None = None, prefix: str = "c") -> Clustering:
    """Uniform random assignment of ``m`` ids to at most ``k`` clusters."""
    rng = np.random.default_rng(seed)
    ids = ids if ids is not None else sample_ids(m)
    codes = rng.integers(0, k, size=m)
    return Clustering._from_codes(ids, codes, [f"{prefix}{j}" for j in range(k)])


def skewed_clustering(m: int, k: int, seed, ids: tuple | None = None, prefix: str = "c", alpha: float = 1.2) -> Clustering:
    """Random assignment with Zipf-like cluster sizes (a few big families, a long tail)."""
    rng = np.random.default_rng(seed)
    ids = ids if ids is not None else sample_ids(m)
    weights = 1.0 / np.arange(1, k + 1) ** alpha
    codes = rng.choice(k, size=m, p=weights / weights.sum())
    return Clustering._from_codes(ids, codes, [f"{prefix}{j}" for j in range(k)])


@dataclass
class PlantedCorpus:
    reference: Clustering
    refinement: Clustering
    agtr: Clustering
    predicted: Clustering
    epsilon: int
    seed: int
    meta: dict = field(default_factory=dict)


def planted_corpus(m: int = 1000, n_families: int = 50, seed: int = 0, split_probability: float = 0.3,
                   agtr_errors: int = 0, predicted_noise: float = 0.05) -> PlantedCorpus:
    """Reference families, a true refinement of them, an AGTR with ``agtr_errors``
    misplaced samples, and a predicted clustering that is the reference with a
    fraction ``predicted_noise`` of samples moved."""
    ss = np.random.SeedSequence(seed)
    s_ref, s_split, s_err, s_pred = (int(x.generate_state(1)[0]) for x in ss.spawn(4))
    ids = sample_ids(m)
    rng = np.random.default_rng(s_ref)
    # every family gets at least one member, the rest uniformly
    codes = np.concatenate([np.arange(n_families), rng.integers(0, n_families, size=m - n_families)])
    rng.shuffle(codes)
    reference = Clustering._from_codes(ids, codes, [f"fam{j:03d}" for j in range(n_families)])
    refinement = random_refinement(reference, split_probability, s_split)
    agtr = perturb(refinement, agtr_errors, s_err)
    predicted = perturb(reference, int(round(predicted_noise * m)), s_pred)
    return PlantedCorpus(reference, refinement, agtr, predicted, agtr_errors, seed,
                         {"m": m, "n_families": n_families, "split_probability": split_probability,
                          "predicted_noise": predicted_noise})


# -- PE fixtures -----------------------------------------------------------

FILE_ALIGN = 0x200
SECTION_ALIGN = 0x1000


@dataclass
class SectionSpec:
    name: bytes = b".text"
    vaddr: int = 0x1000
    data: bytes = b"\x90" * 16
    characteristics: int = 0x60000020
    raw_size: int | None = None  # defaults to len(data) rounded up to FILE_ALIGN


@dataclass
class PeSpec:
    characteristics: int = 0x0102
    subsystem: int = 2
    stack_commit: int = 0x1000
    heap_commit: int = 0x1000
    sections: list = field(default_factory=lambda: [SectionSpec()])
    pe32plus: bool = False
    timestamp: int = 0x5F000000
    checksum: int = 0
    dos_stub: bytes = b"This program cannot be run in DOS mode.\r\r\n$"
    stack_reserve: int = 0x100000
    heap_reserve: int = 0x100000


def build_pe(spec: PeSpec | None = None, **overrides) -> bytes:
    """Assemble a small, structurally valid PE image from ``spec``.

    The result loads in standard PE parsers; it is not meant to run.
    """
    spec = spec or PeSpec()
    for key, value in overrides.items():
        setattr(spec, key, value)
    opt_size = 240 if spec.pe32plus else 224
    e_lfanew = (0x40 + len(spec.dos_stub) + 7) & ~7
    table = e_lfanew + 4 + 20 + opt_size
    headers_size = _align(table + 40 * len(spec.sections), FILE_ALIGN)

    raw_layout = []
    pos = headers_size
    for s in spec.sections:
        raw_size = s.raw_size if s.raw_size is not None else _align(len(s.data), FILE_ALIGN)
        raw_layout.append((pos if raw_size else 0, raw_size))
        pos += raw_size
    buf = bytearray(pos)

    buf[0:2] = b"MZ"
    struct.pack_into("<I", buf, 0x3C, e_lfanew)
    buf[0x40:0x40 + len(spec.dos_stub)] = spec.dos_stub
    buf[e_lfanew:e_lfanew + 4] = b"PE\0\0"
    machine = 0x8664 if spec.pe32plus else 0x14C
    struct.pack_into("<HHIIIHH", buf, e_lfanew + 4, machine, len(spec.sections), spec.timestamp,
                     0, 0, opt_size, spec.characteristics)

    opt = e_lfanew + 24
    image_size = _align(max([s.vaddr + max(len(s.data), 1) for s in spec.sections] + [SECTION_ALIGN]), SECTION_ALIGN)
    code_size = sum(r for _, r in raw_layout)
    entry = spec.sections[0].vaddr if spec.sections else 0
    if spec.pe32plus:
        struct.pack_into("<HBBIIIII", buf, opt, 0x20B, 14, 0, code_size, 0, 0, entry, entry)
        struct.pack_into("<Q", buf, opt + 24, 0x140000000)
    else:
        struct.pack_into("<HBBIIIIII", buf, opt, 0x10B, 14, 0, code_size, 0, 0, entry, entry, 0)
        struct.pack_into("<I", buf, opt + 28, 0x400000)
    struct.pack_into("<IIHHHHHHIIIIHH", buf, opt + 32, SECTION_ALIGN, FILE_ALIGN, 6, 0, 0, 0, 6, 0, 0,
                     image_size, headers_size, spec.checksum, spec.subsystem, 0x8140)
    if spec.pe32plus:
        struct.pack_into("<QQQQII", buf, opt + 72, spec.stack_reserve, spec.stack_commit,
                         spec.heap_reserve, spec.heap_commit, 0, 16)
    else:
        struct.pack_into("<IIIIII", buf, opt + 72, spec.stack_reserve, spec.stack_commit,
                         spec.heap_reserve, spec.heap_commit, 0, 16)

    for i, (s, (ptr, raw_size)) in enumerate(zip(spec.sections, raw_layout)):
        base = table + 40 * i
        struct.pack_into("<8sIIIIIIHHI", buf, base, s.name[:8], len(s.data), s.vaddr, raw_size, ptr,
                         0, 0, 0, 0, s.characteristics)
        chunk = s.data[:raw_size]
        buf[ptr:ptr + len(chunk)] = chunk
    return bytes(buf)


def _align(value: int, to: int) -> int:
    return (value + to - 1) // to * to


def family_pe_corpus(n_families: int, per_family: int, seed: int) -> list[tuple[str, str, bytes]]:
    """``(sample_id, family, pe_bytes)`` where siblings differ only in bytes the digest ignores:
    timestamp, checksum, DOS stub text and the order of bytes inside each section."""
    rng = np.random.default_rng(seed)
    out = []
    for f in range(n_families):
        n_sec = int(rng.integers(1, 5))
        sections = []
        for j in range(n_sec):
            size = int(rng.integers(64, 3000))
            alphabet = int(rng.integers(2, 256))
            data = rng.integers(0, alphabet, size=size, dtype=np.uint8).tobytes()
            sections.append((f".s{j}".encode(), 0x1000 * (j + 1) * int(rng.integers(1, 9)), data,
                             int(rng.integers(0, 2**32))))
        base = dict(characteristics=int(rng.integers(0, 2**16)), subsystem=int(rng.integers(1, 17)),
                    stack_commit=int(rng.integers(1, 2**24)), heap_commit=int(rng.integers(1, 2**24)),
                    pe32plus=bool(rng.integers(0, 2)))
        # vaddrs must increase for a sane layout
        sections.sort(key=lambda s: s[1])
        for k in range(per_family):
            secs = [SectionSpec(name, va, rng.permutation(np.frombuffer(data, dtype=np.uint8)).tobytes(), ch)
                    for name, va, data, ch in sections]
            stub = bytes(rng.integers(32, 127, size=int(rng.integers(8, 60)), dtype=np.uint8))
            pe = build_pe(PeSpec(sections=secs, timestamp=int(rng.integers(0, 2**32)),
                                 checksum=int(rng.integers(0, 2**32)), dos_stub=stub, **base))
            out.append((f"f{f:03d}_{k:03d}", f"fam{f:03d}", pe))
    return out
