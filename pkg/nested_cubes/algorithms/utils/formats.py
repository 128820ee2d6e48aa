"""JSON and CSV interchange formats"""

import csv
import json
import math
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from typing import IO, Any, Iterable, Optional, Union

import numpy as np

from .analysis import CheckReport, SolveResult, SweepRow
from .cubes import TreeValidation
from .dimension import DimensionReport, DoublingConstant, ExactDimension
from .errors import FormatError
from .metric import FiniteMetricSpace, Metric, MetricValidation
from .rationals import fraction_to_json

POINT_HEADER = "id"
MATRIX_HEADER = ("id_row", "id_col", "dist")


def plain(value: Any) -> Any:
    """Recursively convert library values into JSON-compatible ones"""
    if isinstance(value, Fraction):
        return fraction_to_json(value)
    if isinstance(value, ExactDimension):
        return exact_dimension_to_json(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return _float(float(value))
    if isinstance(value, float):
        return _float(value)
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [plain(v) for v in items]
    if is_dataclass(value) and not isinstance(value, type):
        return plain(asdict(value))
    return value


def _float(value: float) -> Union[float, str]:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def dump_json(obj: dict[str, Any], stream: IO[str], version: Optional[str] = None):
    payload = dict(obj)
    if version is not None:
        payload = {"version": version, **payload}
    json.dump(plain(payload), stream, indent=1, ensure_ascii=False)
    stream.write("\n")


def load_json(stream: IO[str]) -> dict[str, Any]:
    try:
        obj = json.load(stream)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise FormatError("expected a JSON object")
    return obj


def _number(text: str) -> Union[int, Fraction, float]:
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num), int(den))
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError as e:
        raise FormatError(f"not a number: {text!r}") from e


def _format_number(value) -> str:
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return repr(value) if isinstance(value, float) else str(value)


def read_points_csv(
    stream: IO[str], metric: Union[Metric, str] = Metric.EUCLIDEAN
) -> FiniteMetricSpace:
    """Coordinates (`id,x1,...,xd`) or distance triplets (`id_row,id_col,dist`)"""
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise FormatError("empty point file") from None
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]

    if tuple(header) == MATRIX_HEADER:
        return _read_triplets(rows)
    if not header or header[0] != POINT_HEADER:
        raise FormatError(f"unrecognized header: {','.join(header)}")
    ids, coords = [], []
    for row in rows:
        if len(row) != len(header):
            raise FormatError(f"row {row} does not match the header")
        ids.append(row[0].strip())
        coords.append(tuple(_number(v) for v in row[1:]))
    return FiniteMetricSpace.from_coordinates(ids, coords, metric)


def _read_triplets(rows: list[list[str]]) -> FiniteMetricSpace:
    ids: list[str] = []
    seen: dict[str, int] = {}
    entries = {}
    for row in rows:
        if len(row) != 3:
            raise FormatError(f"triplet row {row} needs three fields")
        a, b = row[0].strip(), row[1].strip()
        for pid in (a, b):
            if pid not in seen:
                seen[pid] = len(ids)
                ids.append(pid)
        entries[(a, b)] = _number(row[2])

    matrix = []
    for a in ids:
        line = []
        for b in ids:
            if (a, b) in entries:
                line.append(entries[(a, b)])
            elif (b, a) in entries:
                line.append(entries[(b, a)])
            elif a == b:
                line.append(0)
            else:
                raise FormatError(f"missing distance between {a} and {b}")
        matrix.append(line)
    return FiniteMetricSpace.from_matrix(ids, matrix)


def write_points_csv(space: FiniteMetricSpace, stream: IO[str]):
    if space.coordinates is None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(MATRIX_HEADER)
        for a in space.point_ids:
            for b in space.point_ids:
                writer.writerow([a, b, _format_number(space.distance(a, b))])
        return
    d = len(space.coordinates[0]) if space.coordinates else 0
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([POINT_HEADER] + [f"x{i}" for i in range(1, d + 1)])
    for pid, row in zip(space.point_ids, space.coordinates):
        writer.writerow([pid] + [_format_number(v) for v in row])


def metric_validation_to_json(report: MetricValidation) -> dict[str, Any]:
    return {
        "pass": report.passed,
        "exhaustive": report.exhaustive,
        "truncated": report.truncated,
        "violations": [
            {"kind": v.kind, "ids": list(v.ids), "values": [float(x) for x in v.values]}
            for v in report.violations
        ],
    }


def tree_validation_to_json(report: TreeValidation) -> dict[str, Any]:
    return {
        "pass": report.passed,
        "properties": {
            c.name: {"status": c.status, **({"witness": c.witness} if c.witness else {})}
            for c in report.checks
        },
    }


def exact_dimension_to_json(value: ExactDimension) -> dict[str, Any]:
    out: dict[str, Any] = {
        "value": float(value),
        "ratio": fraction_to_json(value.ratio),
        "length": value.length,
        "base": fraction_to_json(value.base),
    }
    if value.rational is not None:
        out["rational"] = fraction_to_json(value.rational)
    return out


def dimension_report_to_json(report: DimensionReport, emit_evidence: bool = False) -> dict[str, Any]:
    out: dict[str, Any] = {
        "kind": report.kind,
        "method": report.method,
        "value": report.value,
        "constant": report.constant,
        "window": report.window,
        "extreme": report.extreme,
        "flags": list(report.flags),
    }
    if report.exact is not None:
        out["exact"] = exact_dimension_to_json(report.exact)
    evidence = report.evidence if emit_evidence else report.evidence[:1]
    out["evidence"] = [
        {"descriptor": e.descriptor, "gap": e.gap, "log_ratio": e.log_ratio} for e in evidence
    ]
    return out


def doubling_to_json(value: DoublingConstant) -> dict[str, Any]:
    return {
        "form": value.form,
        "value": float(value.value),
        "exact": value.value,
        "witness": value.witness,
        "flags": list(value.flags),
    }


def check_report_to_json(report: CheckReport, emit_evidence: bool = False) -> dict[str, Any]:
    out: dict[str, Any] = {"pass": report.passed, **report.details}
    if report.witness is not None:
        out["witness"] = report.witness
    if emit_evidence and report.rows:
        out["rows"] = list(report.rows)
    return out


def solve_result_to_json(result: SolveResult) -> dict[str, Any]:
    return {
        "p": fraction_to_json(result.p),
        "p_float": float(result.p),
        "eta": [fraction_to_json(e) for e in result.eta],
        "achieved": result.achieved,
        "target": result.target,
        "tol": result.tol,
        "iterations": result.iterations,
        "kind": result.kind,
    }


def write_sweep_csv(rows: Iterable[SweepRow], stream: IO[str]):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["p_num", "p_den", "dim_assouad", "dim_lower"])
    for row in rows:
        writer.writerow(
            [row.p.numerator, row.p.denominator, repr(row.dim_assouad), repr(row.dim_lower)]
        )
