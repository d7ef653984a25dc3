"""
Tests for TMX, key-value tables, bitext and placeholder lexing.
"""

import io
import random

import pytest
from openpyxl import Workbook

from src.errors import (
    BitextLengthMismatch,
    DuplicateKey,
    EmbeddedNewline,
    EncodingError,
    InvalidUnit,
    LocFileError,
    MalformedXml,
    UnsupportedVersion,
)
from src.locfile import (
    KeyValueTableReader,
    KvFormat,
    PlaceholderKind,
    PlaceholderLexer,
    RawEntry,
    TmxReader,
    TranslationUnit,
    align_by_key,
    decode_utf8,
    extract_placeholders,
    parse_kv_table,
    parse_tmx,
    read_bitext,
    read_lines,
    splice_placeholders,
    write_bitext,
    write_tmx,
)

SAMPLE_TMX = """<?xml version="1.0" encoding="UTF-8"?>
<tmx version="1.4">
  <header srclang="en" creationtool="CK" segtype="sentence"/>
  <body>
    <tu tuid="GREET">
      <prop type="x-origin">dialogue.esp</prop>
      <tuv xml:lang="en"><prop type="speaker">Lydia</prop><seg>I am sworn to carry your burdens.</seg></tuv>
      <tuv xml:lang="fr"><seg>Je suis li\u00e9e \u00e0 toi.</seg></tuv>
    </tu>
    <tu tuid="BOLD">
      <tuv xml:lang="fr"><seg>Le <bpt i="1">&lt;b&gt;</bpt>dragon<ept i="1">&lt;/b&gt;</ept></seg></tuv>
      <tuv xml:lang="en"><seg>The <bpt i="1">&lt;b&gt;</bpt>dragon<ept i="1">&lt;/b&gt;</ept></seg></tuv>
    </tu>
    <tu tuid="BROKEN"><tuv xml:lang="en"><seg>Only one side</seg></tuv></tu>
    <tu tuid="ODD"><tuv xml:lang="en"><seg>x</seg></tuv><tuv xml:lang="fr"><seg>y</seg></tuv><custom/></tu>
  </body>
</tmx>
"""


def unit(key, source, target, source_lang="en", target_lang="fr", origin=""):
    return TranslationUnit(RawEntry(key, source, source_lang), RawEntry(key, target, target_lang), origin)


class TestTmxReader:
    def test_units_and_issues(self):
        reader = TmxReader(source="sample.tmx")
        units = reader.read(SAMPLE_TMX.encode("utf-8"))
        assert [u.source.key for u in units] == ["GREET", "BOLD", "ODD"]
        assert reader.header["srclang"] == "en"
        assert sorted(issue["kind"] for issue in reader.issues) == ["MissingVariant", "UnknownElement"]

    def test_props_and_origin(self):
        greet = parse_tmx(SAMPLE_TMX.encode("utf-8"))[0]
        assert greet.origin == "dialogue.esp"
        assert greet.source.meta == {"speaker": "Lydia"}
        assert greet.target.text == "Je suis li\u00e9e \u00e0 toi."

    def test_srclang_decides_the_source_side(self):
        bold = parse_tmx(SAMPLE_TMX.encode("utf-8"))[1]
        assert bold.source.lang == "en"
        assert bold.source.text == "The <b>dragon</b>"
        assert bold.target.text == "Le <b>dragon</b>"

    def test_bom_is_ignored(self):
        data = b"\xef\xbb\xbf" + SAMPLE_TMX.encode("utf-8")
        assert len(parse_tmx(data)) == 3

    def test_unsupported_version(self):
        with pytest.raises(UnsupportedVersion) as excinfo:
            parse_tmx(b'<tmx version="2.0"><body/></tmx>')
        assert excinfo.value.version == "2.0"
        with pytest.raises(UnsupportedVersion):
            parse_tmx(b"<xliff/>")

    def test_malformed_xml(self):
        with pytest.raises(MalformedXml) as excinfo:
            parse_tmx(b'<tmx version="1.4"><body>')
        assert excinfo.value.line is not None


class TestTmxWriter:
    def test_round_trip(self):
        units = parse_tmx(SAMPLE_TMX.encode("utf-8"))
        assert parse_tmx(write_tmx(units)) == units

    def test_randomized_round_trip(self):
        rng = random.Random(17)
        pieces = ["Dragon", "\u00e9p\u00e9e", "&", "<b>", "</b>", "{0}", "%s", "\"", "\u2019", "[PC]", " ", "  ", "\u00a0", "\u3042"]
        units = []
        for i in range(10_000):
            source = "".join(rng.choices(pieces, k=rng.randint(0, 8)))
            target = "".join(rng.choices(pieces, k=rng.randint(0, 8)))
            meta = {"speaker": rng.choice(["Lydia", "Jarl & co"])} if rng.random() < 0.3 else {}
            units.append(TranslationUnit(RawEntry(f"K{i}", source, "en", meta), RawEntry(f"K{i}", target, "fr"),
                                         rng.choice(["", "skyrim.esm"])))
        data = write_tmx(units)
        restored = parse_tmx(data)
        assert restored == units
        assert write_tmx(restored) == data

    def test_deterministic(self):
        units = [unit("A", "Hello", "Bonjour", origin="a.tmx")]
        assert write_tmx(units) == write_tmx(units)

    def test_header(self):
        data = write_tmx([unit("A", "Hello", "Bonjour")], {"creationdate": "20200101T000000Z", "x-game": "Skyrim"})
        reader = TmxReader()
        reader.read(data)
        assert reader.header["creationtool"] == "locbench"
        assert reader.header["srclang"] == "en"
        assert reader.header["creationdate"] == "20200101T000000Z"
        assert b'<prop type="x-game">Skyrim</prop>' in data

    def test_distinct_target_key_survives(self):
        original = TranslationUnit(RawEntry("SRC", "Hello", "en"), RawEntry("TGT", "Bonjour", "fr"))
        (restored,) = parse_tmx(write_tmx([original]))
        assert restored.target.key == "TGT"
        assert restored.target.meta == {}

    def test_invalid_units(self):
        with pytest.raises(InvalidUnit):
            write_tmx([unit("A", "Hello", "Hello", target_lang="en")])
        with pytest.raises(InvalidUnit):
            write_tmx([unit("A", "Bell\x07", "Cloche")])


class TestKeyValueTables:
    def test_tsv(self):
        data = b"key\ttext\nGREET\tHello\\tWorld\nBAD\nNOTE\tone\\ntwo\n\tno key\n"
        reader = KeyValueTableReader(source="strings.en.tsv")
        entries = reader.read(data, KvFormat.TSV, "en", {"file": "strings"})
        assert [(e.key, e.text) for e in entries] == [("GREET", "Hello\tWorld"), ("NOTE", "one\ntwo")]
        assert entries[0].meta == {"file": "strings", "line": "2"}
        assert [(i["kind"], i["line"]) for i in reader.issues] == [("RaggedRow", 3), ("EmptyKey", 5)]

    def test_csv_line_numbers(self):
        data = b'key,text\nGREET,"Hello, traveler"\nMULTI,"two\nlines"\nLAST,end\n'
        entries = parse_kv_table(data, KvFormat.CSV, "en")
        assert [e.text for e in entries] == ["Hello, traveler", "two\nlines", "end"]
        assert [e.meta["line"] for e in entries] == ["2", "3", "5"]

    def test_xlsx(self):
        workbook = Workbook()
        sheet = workbook.active
        sheet.append(["key", "text"])
        sheet.append(["GREET", "Bonjour"])
        sheet.append(["BYE", "Adieu"])
        buffer = io.BytesIO()
        workbook.save(buffer)
        entries = parse_kv_table(buffer.getvalue(), KvFormat.XLSX, "fr")
        assert [(e.key, e.text, e.lang) for e in entries] == [("GREET", "Bonjour", "fr"), ("BYE", "Adieu", "fr")]

    def test_empty_file(self):
        assert parse_kv_table(b"", KvFormat.TSV, "en") == []

    def test_format_from_extension(self):
        assert KvFormat.from_extension(".tsv") is KvFormat.TSV
        assert KvFormat.from_extension("XLSB") is KvFormat.XLSB
        with pytest.raises(LocFileError):
            KvFormat.from_extension(".txt")


class TestAlignByKey:
    def test_inner_join_with_orphans(self):
        src = [RawEntry(k, f"{k} en", "en") for k in ("A", "B", "C")]
        tgt = [RawEntry(k, f"{k} fr", "fr") for k in ("B", "A", "D")]
        units, orphans = align_by_key(src, tgt, origin="strings")
        assert [(u.source.key, u.target.text) for u in units] == [("A", "A fr"), ("B", "B fr")]
        assert [(o.key, o.lang) for o in orphans] == [("C", "en"), ("D", "fr")]
        assert units[0].origin == "strings"

    def test_duplicate_key(self):
        src = [RawEntry("A", "one", "en", {"line": "1"}), RawEntry("A", "two", "en", {"line": "4"})]
        with pytest.raises(DuplicateKey) as excinfo:
            align_by_key(src, [])
        assert excinfo.value.side == "source"
        assert (excinfo.value.first_line, excinfo.value.second_line) == ("1", "4")

    def test_empty_key_rejected(self):
        with pytest.raises(LocFileError):
            RawEntry("", "text", "en")


class TestPlaceholders:
    def test_kinds_and_literals(self):
        spans = extract_placeholders("Press <Alias=Player> for {count} %s items")
        assert [(s.kind, s.literal) for s in spans] == [
            (PlaceholderKind.TAG, "<Alias=Player>"),
            (PlaceholderKind.VARIABLE, "{count}"),
            (PlaceholderKind.VARIABLE, "%s"),
        ]

    def test_byte_offsets(self):
        (span,) = extract_placeholders("\u00c9p\u00e9e {0}")
        assert (span.start, span.end) == (7, 10)

    def test_longest_match(self):
        (span,) = extract_placeholders("Gold: %{amount}")
        assert span.literal == "%{amount}"

    def test_brackets_and_limits(self):
        assert [s.literal for s in extract_placeholders("[PLAYER] and [ not a tag]")] == ["[PLAYER]"]
        assert extract_placeholders("<" + "a" * 70 + ">") == []

    def test_extra_patterns(self):
        lexer = PlaceholderLexer([r"\$[A-Z_]+\$"])
        (span,) = lexer.extract("Earn $GOLD$ now")
        assert span.kind is PlaceholderKind.TAG
        assert extract_placeholders("Earn $GOLD$ now") == []

    def test_splice_rebuilds_text(self):
        text = "\u00c9p\u00e9e <b>{0}</b> %d"
        assert splice_placeholders(text, extract_placeholders(text)) == text


class TestDecoding:
    def test_invalid_byte_offset(self):
        with pytest.raises(EncodingError) as excinfo:
            decode_utf8(b"ab\xffcd")
        assert excinfo.value.offset == 2

    def test_offset_counts_the_bom(self):
        with pytest.raises(EncodingError) as excinfo:
            decode_utf8(b"\xef\xbb\xbfab\xff")
        assert excinfo.value.offset == 5

    def test_read_lines(self):
        assert read_lines(b"one\r\ntwo\nthree") == ["one", "two", "three"]
        assert read_lines(b"a\n") == ["a"]
        assert read_lines(b"") == []


class TestBitext:
    def test_line_aligned(self):
        src, tgt = write_bitext([unit("A", "Hello", "Bonjour"), unit("B", "Bye", "Adieu")])
        assert src == b"Hello\nBye\n"
        assert read_bitext(src, tgt) == [("Hello", "Bonjour"), ("Bye", "Adieu")]

    def test_embedded_newline(self):
        with pytest.raises(EmbeddedNewline) as excinfo:
            write_bitext([unit("A", "Hello", "Bon\njour")])
        assert excinfo.value.side == "target"

    def test_length_mismatch(self):
        with pytest.raises(BitextLengthMismatch):
            read_bitext(b"a\nb\n", b"a\n")
