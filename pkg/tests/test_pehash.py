import hashlib
import json
import math
import struct
from pathlib import Path

import pytest

from agtr.core import SINGLETON_PREFIX, DuplicateSample, build_clustering
from agtr.pehash import (
    BadPeOffset,
    MissingMzMagic,
    MissingPeSignature,
    SectionCountExceeded,
    SectionOutOfBounds,
    TruncatedHeaders,
    UnknownOptionalHeaderMagic,
    build_agtr,
    digest_bytes,
    entropy_bucket,
    log2_bucket,
    parse_pe,
    pehash_digest,
    scan,
    xor_fold32,
)
from agtr.refinement import min_corrections_to_refinement
from agtr.synthetic import PeSpec, SectionSpec, build_pe, family_pe_corpus
from pe_fixtures import FIXTURES, TRACKED, UNTRACKED, base_spec, with_section

pefile = pytest.importorskip("pefile")
GOLDEN = json.loads((Path(__file__).parent / "golden" / "pehash_digests.json").read_text())


def digest(data: bytes) -> str:
    return pehash_digest(parse_pe(data))


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_golden_digests(name):
    assert digest(FIXTURES[name]()) == GOLDEN[name]


def test_golden_by_hand():
    # features of base_spec() packed manually; .data is 300 ones and 724 zeros
    p1, p0 = 300 / 1024, 724 / 1024
    ent = int(-(p1 * math.log2(p1) + p0 * math.log2(p0)) * 32)
    buf = bytes([0x01, 0x02, 0x00, 0x02, 12, 13, 12, 10, 0x40, 255, 13, 10, 0x80, ent])
    assert hashlib.sha256(buf).hexdigest() == GOLDEN["two_sections"]


@pytest.mark.parametrize("pe32plus", [False, True])
def test_fields_match_pefile(pe32plus):
    data = build_pe(base_spec(pe32plus=pe32plus, stack_commit=0x12345, heap_commit=0x777))
    meta = parse_pe(data)
    ref = pefile.PE(data=data)
    assert meta.characteristics == ref.FILE_HEADER.Characteristics
    assert meta.subsystem == ref.OPTIONAL_HEADER.Subsystem
    assert meta.stack_commit_log2 == int(math.log2(ref.OPTIONAL_HEADER.SizeOfStackCommit))
    assert meta.heap_commit_log2 == int(math.log2(ref.OPTIONAL_HEADER.SizeOfHeapCommit))
    assert len(meta.sections) == len(ref.sections) == 2
    for ours, theirs in zip(meta.sections, ref.sections):
        assert ours.vaddr_log2 == int(math.log2(theirs.VirtualAddress))
        assert ours.raw_size_log2 == int(math.log2(theirs.SizeOfRawData))
        assert ours.characteristics_folded == (
            theirs.Characteristics ^ theirs.Characteristics >> 8 ^ theirs.Characteristics >> 16
            ^ theirs.Characteristics >> 24) & 0xFF
        # pefile reports entropy in bits; our bucket is that times 32, floored
        assert ours.entropy_bucket == min(255, int(theirs.get_entropy() * 32 + 1e-9))


def test_minimal_fixture_has_one_section():
    meta = parse_pe(FIXTURES["minimal32"]())
    assert len(meta.sections) == 1


def test_helpers():
    assert log2_bucket(0) == 0 and log2_bucket(1) == 0 and log2_bucket(1024) == 10 and log2_bucket(1025) == 10
    assert log2_bucket(2**70) == 63
    assert xor_fold32(0x11223344) == 0x11 ^ 0x22 ^ 0x33 ^ 0x44
    assert entropy_bucket(b"") == 0
    assert entropy_bucket(b"\x00" * 10) == 0
    assert entropy_bucket(b"\x00\x01" * 10) == 32
    assert entropy_bucket(bytes(range(256))) == 255


# -- errors ----------------------------------------------------------------


def _patch(data: bytes, offset: int, fmt: str, value) -> bytes:
    buf = bytearray(data)
    struct.pack_into(fmt, buf, offset, value)
    return bytes(buf)


def _lfanew(data: bytes) -> int:
    return struct.unpack_from("<I", data, 0x3C)[0]


def test_errors_each_variant():
    good = build_pe(base_spec())
    e = _lfanew(good)
    cases = [
        (b"MZ", TruncatedHeaders),
        (b"", TruncatedHeaders),
        (b"\x7fELF" + bytes(100), MissingMzMagic),
        (b"ZM" + bytes(200), MissingMzMagic),
        (_patch(good, 0x3C, "<I", len(good) + 10), BadPeOffset),
        (_patch(good, 0x3C, "<I", len(good) - 2), TruncatedHeaders),
        (_patch(good, e, "<4s", b"NE\0\0"), MissingPeSignature),
        (_patch(good, e + 6, "<H", 97), SectionCountExceeded),
        (_patch(good, e + 24, "<H", 0x107), UnknownOptionalHeaderMagic),
        (_patch(good, e + 20, "<H", 40), TruncatedHeaders),
        (good[: e + 24 + 100], TruncatedHeaders),
    ]
    table = e + 24 + 224
    cases.append((_patch(good, table + 20, "<I", len(good)), SectionOutOfBounds))
    cases.append((_patch(good, e + 6, "<H", 60), TruncatedHeaders))
    for data, exc in cases:
        with pytest.raises(exc):
            parse_pe(data)
        assert digest_bytes(data) == (None, exc.__name__)


def test_ninety_six_sections_allowed():
    secs = [SectionSpec(f".s{i}".encode(), 0x1000 * (i + 1), b"\x01", 0x40000040) for i in range(96)]
    meta = parse_pe(build_pe(PeSpec(sections=secs)))
    assert len(meta.sections) == 96


# -- mutation suite ----------------------------------------------------------

@pytest.mark.parametrize("feature", sorted(TRACKED))
def test_sensitivity(feature):
    base = digest(build_pe(base_spec()))
    assert digest(build_pe(TRACKED[feature]())) != base


@pytest.mark.parametrize("feature", sorted(UNTRACKED))
def test_insensitivity(feature):
    base = digest(build_pe(base_spec()))
    assert digest(build_pe(UNTRACKED[feature]())) == base


def test_raw_byte_insensitivity():
    good = build_pe(base_spec())
    e = _lfanew(good)
    base = digest(good)
    patched = [
        _patch(good, 0x40, "<8s", b"garbage!"),     # DOS stub
        _patch(good, e + 8, "<I", 0x11111111),      # TimeDateStamp
        _patch(good, e + 24 + 64, "<I", 0x22222222),  # CheckSum
        _patch(good, e + 24 + 2, "<B", 99),         # MajorLinkerVersion
        _patch(good, e + 4, "<H", 0x1C0),           # Machine
    ]
    for data in patched:
        assert digest(data) == base


def test_equal_histogram_contents_collide():
    a = with_section(1, data=b"\x00\x01\x02" * 200)
    b = with_section(1, data=b"\x02\x01\x00" * 200)
    assert digest(build_pe(a)) == digest(build_pe(b))


def test_identical_files_identical_digest():
    data = build_pe(base_spec())
    assert digest(data) == digest(bytes(data)) == digest(bytearray(data))


# -- AGTR grouping ------------------------------------------------------------


def test_build_agtr_basic():
    c = build_agtr([("a", "d1"), ("b", "d1"), ("c", "d2")])
    assert c.n_clusters == 2
    c = build_agtr([("a", "d1"), ("b", None), ("c", None)])
    assert c.n_clusters == 3 and f"{SINGLETON_PREFIX}b" in c.names
    with pytest.raises(DuplicateSample):
        build_agtr([("a", "d1"), ("a", "d2")])


def test_build_agtr_order_independent():
    rows = [(f"s{i}", f"d{i % 7}" if i % 5 else None) for i in range(100)]
    assert build_agtr(rows) == build_agtr(list(reversed(rows)))


def test_all_distinct_digests_give_trivial_recall_bound():
    from agtr.bounds import agtr_bounds

    agtr = build_agtr([(f"s{i}", f"d{i}") for i in range(30)])
    c = build_clustering((f"s{i}", f"c{i % 4}") for i in range(30))
    assert agtr.n_clusters == 30
    assert agtr_bounds(c, agtr, 0).recall_upper_bound == 1.0


def test_family_corpus_grouped_exactly():
    corpus = family_pe_corpus(12, 5, seed=3)
    agtr = build_agtr((sid, digest(data)) for sid, _, data in corpus)
    families = build_clustering((sid, fam) for sid, fam, _ in corpus)
    assert agtr.same_partition(families)
    assert min_corrections_to_refinement(agtr, families).count == 0


def test_scan_parallel_matches_serial(tmp_path):
    corpus = family_pe_corpus(4, 3, seed=1)
    for sid, _, data in corpus:
        (tmp_path / sid).write_bytes(data)
    (tmp_path / "junk.bin").write_bytes(b"not a pe file")
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "trunc.exe").write_bytes(b"MZ")
    serial = scan([tmp_path], jobs=1)
    parallel = scan([tmp_path], jobs=3)
    assert serial == parallel
    status = {Path(sid).name: st for sid, _, st in serial}
    assert status["junk.bin"] == "MissingMzMagic"
    assert status["trunc.exe"] == "TruncatedHeaders"
    by_sha = scan([tmp_path, tmp_path / corpus[0][0]], id_mode="sha256")
    assert len(by_sha) == len(corpus) + 2
