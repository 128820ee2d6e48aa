import io
import json
import math
from fractions import Fraction

import pytest

from nested_cubes.algorithms.utils.analysis import CheckReport, SweepRow
from nested_cubes.algorithms.utils.dimension import MEASURE_ASSOUAD, exact_dimension_spec
from nested_cubes.algorithms.utils.errors import FormatError
from nested_cubes.algorithms.utils.formats import (
    check_report_to_json,
    dump_json,
    exact_dimension_to_json,
    load_json,
    plain,
    read_points_csv,
    write_points_csv,
    write_sweep_csv,
)
from nested_cubes.algorithms.utils.generators import cantor_points


def test_read_coordinates():
    space = read_points_csv(io.StringIO("id,x1\na,0\nb,1/2\nc,3/4\n"))
    assert space.point_ids == ("a", "b", "c")
    assert space.exact
    assert space.distance("a", "b") == Fraction(1, 2)
    assert space.distance("b", "c") == Fraction(1, 4)


def test_read_two_dimensional_chebyshev():
    space = read_points_csv(io.StringIO("id,x1,x2\np,0,0\nq,1,3\n"), "chebyshev")
    assert space.distance("p", "q") == 3


def test_read_triplets_mirrors_and_fills_diagonal():
    text = "id_row,id_col,dist\na,b,1\nb,c,1\na,c,2\n"
    space = read_points_csv(io.StringIO(text))
    assert space.coordinates is None
    assert space.distance("c", "a") == 2
    assert space.distance("b", "b") == 0


def test_read_triplets_missing_pair():
    with pytest.raises(FormatError):
        read_points_csv(io.StringIO("id_row,id_col,dist\na,b,1\nb,c,1\n"))


@pytest.mark.parametrize(
    "text",
    ["", "name,x\na,1\n", "id,x1\na,1,2\n", "id,x1\na,one\n"],
)
def test_read_rejects_malformed(text):
    with pytest.raises(FormatError):
        read_points_csv(io.StringIO(text))


def test_write_points_keeps_exact_coordinates():
    buffer = io.StringIO()
    write_points_csv(cantor_points(1), buffer)
    assert buffer.getvalue() == "id,x1\n0,0\n1,2/3\n"


def test_plain():
    assert plain({"p": Fraction(1, 9), "r": [math.inf, 1.5], "s": {2, 1}}) == {
        "p": {"num": 1, "den": 9},
        "r": ["inf", 1.5],
        "s": [1, 2],
    }
    assert plain(SweepRow(Fraction(1, 3), 1.0, 1.0)) == {
        "p": {"num": 1, "den": 3},
        "dim_assouad": 1.0,
        "dim_lower": 1.0,
    }


def test_dump_json_puts_version_first():
    buffer = io.StringIO()
    dump_json({"value": Fraction(3, 2)}, buffer, version="0.1.0")
    obj = json.loads(buffer.getvalue())
    assert list(obj) == ["version", "value"]
    assert obj["value"] == {"num": 3, "den": 2}


def test_load_json():
    assert load_json(io.StringIO('{"a": 1}')) == {"a": 1}
    with pytest.raises(FormatError):
        load_json(io.StringIO("{not json"))
    with pytest.raises(FormatError):
        load_json(io.StringIO("[1, 2]"))


def test_exact_dimension_json(triadic):
    obj = exact_dimension_to_json(exact_dimension_spec(triadic, Fraction(1, 9), kind=MEASURE_ASSOUAD))
    assert obj["value"] == 2.0
    assert obj["rational"] == {"num": 2, "den": 1}
    assert obj["base"] == {"num": 3, "den": 1}


def test_check_report_rows_need_evidence():
    report = CheckReport(True, {"pairs": 1}, None, ({"ok": True},))
    assert check_report_to_json(report) == {"pass": True, "pairs": 1}
    assert check_report_to_json(report, emit_evidence=True)["rows"] == [{"ok": True}]


def test_sweep_csv():
    buffer = io.StringIO()
    write_sweep_csv([SweepRow(Fraction(1, 9), 2.0, 0.5)], buffer)
    assert buffer.getvalue().splitlines() == ["p_num,p_den,dim_assouad,dim_lower", "1,9,2.0,0.5"]
