import locale

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from depfusion.datamodel import DescriptorSeries, Split
from depfusion.exceptions import (
    ArityError,
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
from depfusion.ingest import (
    COVAREP_NAMES,
    format_descriptor_table,
    format_feature_csv,
    format_labels,
    format_landmark_table,
    load_labels,
    load_lexicon,
    parse_descriptor_table,
    parse_feature_csv,
    parse_landmark_table,
    parse_transcript,
)


def landmark_row(ts=0.0, xs=None, ys=None, frame=1):
    xs = list(range(68)) if xs is None else xs
    ys = [0.0] * 68 if ys is None else ys
    return ",".join(str(v) for v in [frame, ts] + list(xs) + list(ys))


class TestDescriptorTable:
    def test_header_and_values(self):
        s = parse_descriptor_table("F0,VUV\n120.5,1\n")
        assert s.descriptor_names == ("F0", "VUV")
        assert s.frames.tolist() == [[120.5, 1.0]]

    def test_nan_replaced_and_counted(self):
        s = parse_descriptor_table("F0,VUV\nNaN,1\n2,\n")
        assert s.frames.tolist() == [[0.0, 1.0], [2.0, 0.0]]
        assert s.nan_count == 2

    def test_ragged_row_line_number(self):
        with pytest.raises(RaggedRowError) as err:
            parse_descriptor_table("F0,VUV\n1,2\n1,2,3\n")
        assert err.value.line == 3

    def test_non_numeric(self):
        with pytest.raises(NonNumericCellError) as err:
            parse_descriptor_table("F0,VUV\n1,abc\n")
        assert err.value.line == 2

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            parse_descriptor_table("")
        with pytest.raises(EmptyInputError):
            parse_descriptor_table("F0,VUV\n")

    def test_headerless_uses_canonical_layout(self):
        row = ",".join(["1.0"] * 74)
        s = parse_descriptor_table(row + "\n" + row + "\n")
        assert s.descriptor_names == COVAREP_NAMES
        assert len(COVAREP_NAMES) == 74
        assert s.frames.shape == (2, 74)

    def test_comma_decimal_is_not_a_number(self):
        with pytest.raises(ParseError):
            parse_descriptor_table("F0;VUV\n1,5;2\n")

    def test_locale_independent(self, monkeypatch):
        for name in ("de_DE.UTF-8", "fr_FR.UTF-8"):
            try:
                locale.setlocale(locale.LC_NUMERIC, name)
                break
            except locale.Error:
                continue
        try:
            assert parse_descriptor_table("F0\n1.25\n").frames[0, 0] == 1.25
        finally:
            locale.setlocale(locale.LC_NUMERIC, "C")

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 5)),
                  elements=st.floats(-1e6, 1e6, allow_nan=False)))
    def test_round_trip(self, frames):
        names = tuple(f"d{i}" for i in range(frames.shape[1]))
        s = DescriptorSeries(names, frames)
        back = parse_descriptor_table(format_descriptor_table(s))
        assert back.descriptor_names == s.descriptor_names
        assert np.array_equal(back.frames, s.frames)

    def test_accepts_stream(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("F0\n3\n")
        with open(p) as fh:
            assert parse_descriptor_table(fh).frames[0, 0] == 3.0


class TestLandmarkTable:
    def test_positional_row(self):
        s = parse_landmark_table(landmark_row() + "\n")
        assert s.frames.shape == (1, 68, 2)
        assert tuple(s.frames[0, 5]) == (5.0, 0.0)

    def test_header_by_name(self):
        header = "frame, timestamp, confidence, success," + ",".join(
            [f" x{i}" for i in range(68)] + [f" y{i}" for i in range(68)])
        row = ",".join(["1", "0.0", "0.98", "1"] + [str(i) for i in range(68)] + ["2"] * 68)
        s = parse_landmark_table(header + "\n" + row + "\n")
        assert tuple(s.frames[0, 7]) == (7.0, 2.0)
        assert s.confidence.tolist() == [0.98]

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            parse_landmark_table("")

    def test_wrong_arity(self):
        row = ",".join(["1", "0.0"] + ["0"] * 135)
        with pytest.raises(ArityError) as err:
            parse_landmark_table(row + "\n")
        assert err.value.line == 1

    def test_non_monotone(self):
        text = landmark_row(0.5) + "\n" + landmark_row(0.2, frame=2) + "\n"
        with pytest.raises(NonMonotoneTimestampError) as err:
            parse_landmark_table(text)
        assert err.value.line == 2

    def test_round_trip(self):
        s = parse_landmark_table(landmark_row(0.0) + "\n" + landmark_row(0.1, frame=2) + "\n")
        back = parse_landmark_table(format_landmark_table(s))
        assert np.array_equal(back.frames, s.frames)


class TestTranscript:
    def test_single_utterance(self):
        t = parse_transcript("0.0\t2.5\tParticipant\thello there\n")
        assert len(t.utterances) == 1
        assert t.duration == 2.5
        assert t.utterances[0].text.split() == ["hello", "there"]

    def test_reversed_times(self):
        with pytest.raises(MalformedTimeError) as err:
            parse_transcript("3.0\t2.5\tParticipant\thi\n")
        assert err.value.line == 1

    def test_bad_time(self):
        with pytest.raises(MalformedTimeError):
            parse_transcript("0.0\tsoon\tParticipant\thi\n")

    def test_header_only(self):
        assert parse_transcript("start_time\tstop_time\tspeaker\tvalue\n").utterances == ()

    def test_missing_field(self):
        with pytest.raises(MissingFieldError) as err:
            parse_transcript("start_time\tstop_time\tspeaker\tvalue\n0.0\t1.0\tEllie\n")
        assert err.value.line == 2


class TestLexicon:
    def test_sentiment_entry(self):
        # abandon = -2 in the published AFINN-111 list
        lex = load_lexicon("abandon\t-2\n", "sentiment")
        assert lex.entries == {"abandon": -2}

    def test_depression_lowercased(self):
        assert "hopeless" in load_lexicon("Hopeless\n", "depression")

    def test_out_of_range(self):
        with pytest.raises(ValenceRangeError) as err:
            load_lexicon("fine\t2\nweird\t-9\n", "sentiment")
        assert err.value.line == 2

    def test_duplicates_keep_last(self):
        assert load_lexicon("good\t2\nGood\t3\n", "sentiment").entries == {"good": 3}

    def test_multiword_term(self):
        lex = load_lexicon("can't stand\t-3\n", "sentiment")
        assert lex.phrases == {"can't stand": -3}

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            load_lexicon("\n\n", "depression")


class TestLabels:
    def test_row(self):
        (rec,) = load_labels("s001,10,1,train")
        assert (rec.session_id, rec.phq8, rec.gender, rec.split) == ("s001", 10, 1, Split.TRAIN)

    def test_out_of_range(self):
        with pytest.raises(LabelRangeError):
            load_labels("s001,25,1,train")

    def test_duplicate(self):
        with pytest.raises(DuplicateIdError) as err:
            load_labels("s001,1,0,train\ns001,2,1,development\n")
        assert err.value.line == 2

    def test_optional_label_and_header(self):
        recs = load_labels("session_id,phq8,gender,split\ns9,,0,test\n")
        assert recs[0].phq8 is None and recs[0].split == Split.TEST

    def test_round_trip(self):
        recs = load_labels("s1,3,0,train\ns2,,1,test\n")
        assert load_labels(format_labels(recs)) == recs


def test_feature_csv_round_trip():
    from depfusion.datamodel import FeatureVector

    fvs = [FeatureVector(f"s{i}", "text", ("a", "b"), [i * 0.1, 1 / 3]) for i in range(3)]
    back = parse_feature_csv(format_feature_csv(fvs, comment="stamp"), "text")
    assert [f.session_id for f in back] == ["s0", "s1", "s2"]
    assert all(np.array_equal(a.values, b.values) for a, b in zip(fvs, back))
