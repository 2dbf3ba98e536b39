import io

import numpy as np
import pytest

from fdrkit.ingest import (CsvConfig, EmptyFile, MalformedRow, NoImpostorsInDev, NonFiniteScore,
                           format_scores, load_partitioned, load_split, read_scores, write_scores)
from fdrkit.scores import DataWarning

HEADER = "enroll_demo,probe_demo,score,kind\n"


def parse(text, **kw):
    return read_scores(io.StringIO(text), **kw)


def test_basic_parse_and_sorted_labels():
    s = parse(HEADER + "z,z,0.9,Genuine\na,z,0.1,IMPOSTOR\n\n")
    assert s.labels == ("a", "z")
    assert s.n_genuine == 1 and s.n_impostors == 1
    assert [r.enroll_demo for r in s] == ["z", "a"]


def test_distance_polarity_negates():
    s = parse(HEADER + "a,a,0.25,genuine\n", polarity="distance")
    assert s.scores[0] == -0.25


def test_empty_file():
    with pytest.raises(EmptyFile):
        parse("")
    with pytest.raises(EmptyFile):
        parse(HEADER)


def test_missing_column_reports_line_one():
    with pytest.raises(MalformedRow) as err:
        parse("enroll_demo,probe_demo,score\na,a,1\n")
    assert err.value.line == 1


@pytest.mark.parametrize("row, line", [
    ("a,a,abc,genuine", 3),
    ("a,a,0.1,maybe", 3),
    ("a,b,0.1,genuine", 3),
    (",a,0.1,impostor", 3),
    ("a,a", 3),
])
def test_malformed_rows_carry_line_numbers(row, line):
    with pytest.raises(MalformedRow) as err:
        parse(HEADER + "a,a,0.5,impostor\n" + row + "\n")
    assert err.value.line == line


@pytest.mark.parametrize("value", ["nan", "inf", "-inf", "NaN"])
def test_non_finite_score(value):
    with pytest.raises(NonFiniteScore):
        parse(HEADER + f"a,a,{value},impostor\n")


def test_extra_column_warns():
    with pytest.warns(DataWarning):
        s = parse("enroll_demo,probe_demo,score,kind,note\na,a,1,genuine,x\n")
    assert len(s) == 1


def test_round_trip_preserves_exact_floats(tmp_path, rng):
    n = 200
    labels = np.array(["p,q", "r", "s\"t"])
    e = labels[rng.integers(0, 3, n)]
    gen = rng.random(n) < 0.3
    p = np.where(gen, e, labels[rng.integers(0, 3, n)])
    from fdrkit.scores import ScoreSet
    s = ScoreSet.from_arrays(e, p, rng.normal(size=n), gen)
    write_scores(s, tmp_path / "s.csv")
    from fdrkit.ingest import load_scores
    back = load_scores(tmp_path / "s.csv")
    assert sorted(map(tuple, (vars(r).values() for r in back))) == sorted(map(tuple, (vars(r).values() for r in s)))
    np.testing.assert_array_equal(back.scores, s.scores)


def test_format_is_deterministic(tiny):
    assert format_scores(tiny) == format_scores(tiny)


def test_load_split_requires_dev_impostors(tmp_path):
    (tmp_path / "dev.csv").write_text(HEADER + "a,a,0.9,genuine\n")
    (tmp_path / "test.csv").write_text(HEADER + "a,a,0.9,genuine\n")
    with pytest.raises(NoImpostorsInDev):
        load_split(tmp_path / "dev.csv", tmp_path / "test.csv")


def test_partitioned_file(tmp_path):
    (tmp_path / "all.csv").write_text(
        "enroll_demo,probe_demo,score,kind,split\n"
        "a,a,0.1,impostor,dev\na,a,0.9,genuine,test\nb,b,0.2,impostor,test\n"
    )
    with pytest.warns(DataWarning):
        data = load_partitioned(tmp_path / "all.csv")
    assert len(data.dev) == 1 and len(data.test) == 2


def test_bad_split_value():
    with pytest.raises(MalformedRow):
        parse("enroll_demo,probe_demo,score,kind,split\na,a,0.1,impostor,train\n")


def test_split_filter_without_column():
    with pytest.raises(MalformedRow):
        parse(HEADER + "a,a,0.1,impostor\n", config=CsvConfig(split="dev"))


def test_semicolon_delimiter():
    s = parse("enroll_demo;probe_demo;score;kind\na;a;0.5;impostor\n", config=CsvConfig(delimiter=";"))
    assert s.scores[0] == 0.5
