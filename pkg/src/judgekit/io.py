"""File formats, report documents, and deterministic rendering.

Parsers reject rather than coerce: no silent clamping, no NaN-as-missing, and
every error names the offending line. Reports embed digests of canonicalized
input bytes so identical inputs provably produce identical documents.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import __version__
from .errors import DataIntegrityError, ParseError
from .pipeline import ComparisonReport, ConsolidatedRatings, JudgeReport, RunRecord, SweepRow
from .ratings import MatrixDiagnostics, OrdinalScale, RatingsMatrix
from .reliability import PROFILE_COLUMNS

SCHEMA_VERSION = 1

RATINGS_FORMATS = ("long-csv", "wide-csv")
RUNS_FORMATS = ("run-jsonl", "run-csv")
REPORT_STYLES = ("tsv", "json", "markdown")

_RUN_FIELDS = ("query_id", "system_id", "metric", "run", "rating")

PROFILE_TITLES = {
    "percent_agreement": "Percent Agr.",
    "cohen_kappa": "Cohen kappa",
    "krippendorff_alpha": "Krippendorff alpha",
    "gwet_ac2_linear": "Gwet AC2 (lin)",
    "gwet_ac2_quadratic": "Gwet AC2 (quad)",
    "spearman_rho": "Spearman",
    "kendall_tau_b": "Kendall tau",
}


@dataclass(frozen=True)
class LongFormRow:
    """One long-CSV record; an empty rating means missing, never level 0."""

    item_id: str
    rater_id: str
    rating: int | None


def canonical_digest(path: str | Path) -> str:
    """sha256 of the file with line endings normalized to LF."""
    data = Path(path).read_bytes().replace(b"\r\n", b"\n").replace(b"\r", b"\n")
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _parse_level(text: str, scale: OrdinalScale, line_no: int) -> int | None:
    text = text.strip()
    if text == "":
        return None
    try:
        level = int(text)
    except ValueError:
        raise ParseError(f"line {line_no}: rating {text!r} is not an integer level") from None
    if not 1 <= level <= scale.k:
        raise ParseError(f"line {line_no}: rating {level} outside 1..{scale.k}")
    return level


def parse_ratings(path: str | Path, fmt: str = "long-csv", scale: OrdinalScale | None = None) -> RatingsMatrix:
    """Read an items x raters matrix from long or wide CSV."""
    scale = scale or OrdinalScale.from_k(4)
    if fmt not in RATINGS_FORMATS:
        raise ValueError(f"format must be one of {RATINGS_FORMATS}, got {fmt!r}")
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(_io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{path}: empty file, header row required") from None
    header = [h.strip() for h in header]
    if fmt == "long-csv":
        return _ratings_from_long(path, header, reader, scale)
    return _ratings_from_wide(path, header, reader, scale)


def _ratings_from_long(path, header, reader, scale) -> RatingsMatrix:
    if header != ["item", "rater", "rating"]:
        raise ParseError(f"{path}: long-csv header must be item,rater,rating, got {header}")
    records: list[LongFormRow] = []
    seen: dict[tuple[str, str], int] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(f"line {line_no}: expected 3 columns, got {len(row)}")
        item, rater = row[0].strip(), row[1].strip()
        if not item or not rater:
            raise ParseError(f"line {line_no}: empty item or rater id")
        if (item, rater) in seen:
            raise DataIntegrityError(
                f"line {line_no}: duplicate cell for item {item!r}, rater {rater!r} "
                f"(first seen on line {seen[(item, rater)]})"
            )
        seen[(item, rater)] = line_no
        records.append(LongFormRow(item, rater, _parse_level(row[2], scale, line_no)))
    items = list(dict.fromkeys(r.item_id for r in records))
    raters = list(dict.fromkeys(r.rater_id for r in records))
    cells = {(r.item_id, r.rater_id): r.rating for r in records}
    rows = tuple(tuple(cells.get((item, rater)) for rater in raters) for item in items)
    return RatingsMatrix(scale=scale, raters=tuple(raters), items=tuple(items), rows=rows)


def _ratings_from_wide(path, header, reader, scale) -> RatingsMatrix:
    if len(header) < 2 or header[0] != "item":
        raise ParseError(f"{path}: wide-csv header must be item,<rater>,..., got {header}")
    raters = header[1:]
    if len(set(raters)) != len(raters):
        raise ParseError(f"{path}: duplicate rater columns in header: {raters}")
    items: list[str] = []
    rows: list[tuple[int | None, ...]] = []
    seen: dict[str, int] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"line {line_no}: expected {len(header)} columns, got {len(row)}")
        item = row[0].strip()
        if not item:
            raise ParseError(f"line {line_no}: empty item id")
        if item in seen:
            raise DataIntegrityError(
                f"line {line_no}: duplicate item {item!r} (first seen on line {seen[item]})"
            )
        seen[item] = line_no
        items.append(item)
        rows.append(tuple(_parse_level(cell, scale, line_no) for cell in row[1:]))
    return RatingsMatrix(scale=scale, raters=tuple(raters), items=tuple(items), rows=tuple(rows))


def parse_runs(path: str | Path, fmt: str = "run-jsonl", scale: OrdinalScale | None = None) -> list[RunRecord]:
    """Read per-run judge records; detects duplicate (query, system, metric, run) keys."""
    scale = scale or OrdinalScale.from_k(4)
    if fmt not in RUNS_FORMATS:
        raise ValueError(f"format must be one of {RUNS_FORMATS}, got {fmt!r}")
    text = Path(path).read_text(encoding="utf-8")
    records: list[RunRecord] = []
    seen: dict[tuple[str, str, str, int], int] = {}
    if fmt == "run-jsonl":
        raw_rows = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {line_no}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise ParseError(f"line {line_no}: expected a JSON object")
            raw_rows.append((line_no, obj))
    else:
        reader = csv.reader(_io.StringIO(text))
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file, header row required") from None
        if header != list(_RUN_FIELDS):
            raise ParseError(f"{path}: run-csv header must be {','.join(_RUN_FIELDS)}, got {header}")
        raw_rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(_RUN_FIELDS):
                raise ParseError(f"line {line_no}: expected {len(_RUN_FIELDS)} columns, got {len(row)}")
            raw_rows.append((line_no, dict(zip(_RUN_FIELDS, (cell.strip() for cell in row)))))
    for line_no, obj in raw_rows:
        records.append(_run_record(obj, scale, line_no, seen))
    return records


def _run_record(obj: Mapping[str, Any], scale, line_no: int, seen) -> RunRecord:
    missing = [f for f in _RUN_FIELDS if f not in obj]
    if missing:
        raise ParseError(f"line {line_no}: missing fields {missing}")
    query, system, metric = (str(obj[f]).strip() for f in ("query_id", "system_id", "metric"))
    if not query or not system or not metric:
        raise ParseError(f"line {line_no}: empty query_id, system_id, or metric")
    try:
        run = int(str(obj["run"]))
        rating = int(str(obj["rating"]))
    except ValueError:
        raise ParseError(f"line {line_no}: run and rating must be integers, got {obj['run']!r}, {obj['rating']!r}") from None
    if run < 1:
        raise ParseError(f"line {line_no}: run index must be >= 1, got {run}")
    if not 1 <= rating <= scale.k:
        raise ParseError(f"line {line_no}: rating {rating} outside 1..{scale.k}")
    key = (query, system, metric, run)
    if key in seen:
        raise DataIntegrityError(f"line {line_no}: duplicate run record {key} (first seen on line {seen[key]})")
    seen[key] = line_no
    return RunRecord(query_id=query, system_id=system, metric=metric, run=run, rating=rating)


def runs_jsonl_bytes(records: Sequence[RunRecord]) -> bytes:
    lines = [
        json.dumps(
            {
                "query_id": rec.query_id,
                "system_id": rec.system_id,
                "metric": rec.metric,
                "run": rec.run,
                "rating": rec.rating,
            },
            sort_keys=True,
        )
        for rec in records
    ]
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_runs_jsonl(records: Sequence[RunRecord], path: str | Path) -> None:
    Path(path).write_bytes(runs_jsonl_bytes(records))


# ---------------------------------------------------------------------------
# report documents


@dataclass(frozen=True)
class Undefined:
    """Explicit undefined marker carried through reports; never rendered as 0 or NaN."""

    reason: str


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # text | int | number | coefficient | pvalue
    title: str = ""

    def header(self) -> str:
        return self.title or self.name


@dataclass(frozen=True)
class ReportDocument:
    kind: str  # judge-report | comparison-report | sweep-table | describe-table | diagnostics
    columns: tuple[Column, ...]
    rows: tuple[tuple[Any, ...], ...]
    metadata: Mapping[str, Any]
    extra: Mapping[str, Any] = field(default_factory=dict)


def build_metadata(
    inputs: Mapping[str, str] | None = None,
    seed: int | None = None,
    decisions: Mapping[str, Any] | None = None,
) -> dict[str, Any]:
    """Standard report metadata: toolkit version, input digests, seed, decisions in effect."""
    return {
        "toolkit_version": __version__,
        "inputs": dict(sorted((inputs or {}).items())),
        "seed": seed,
        "decisions": dict(sorted((decisions or {}).items())),
    }


def format_cell(value: Any, kind: str) -> str:
    if isinstance(value, Undefined):
        return "undefined"
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if kind == "int":
        return str(int(value))
    if kind == "coefficient" or kind == "number":
        return f"{value:.4f}"
    if kind == "pvalue":
        return f"{value:.4e}" if value < 1e-4 else f"{value:.4f}"
    return str(value)


def _metadata_lines(doc: ReportDocument) -> list[str]:
    meta = doc.metadata
    lines = [
        f"schema_version: {SCHEMA_VERSION}",
        f"kind: {doc.kind}",
        f"toolkit_version: {meta.get('toolkit_version', __version__)}",
    ]
    for name, digest in sorted((meta.get("inputs") or {}).items()):
        lines.append(f"input {name}: {digest}")
    if meta.get("seed") is not None:
        lines.append(f"seed: {meta['seed']}")
    for key, value in sorted((meta.get("decisions") or {}).items()):
        lines.append(f"decision {key}: {value}")
    return lines


def render_report(doc: ReportDocument, style: str = "tsv") -> bytes:
    """Deterministic bytes for a report document; same document, same bytes."""
    if style not in REPORT_STYLES:
        raise ValueError(f"style must be one of {REPORT_STYLES}, got {style!r}")
    if style == "json":
        return _render_json(doc)
    if style == "tsv":
        return _render_tsv(doc)
    return _render_markdown(doc)


def _json_cell(value: Any) -> Any:
    if isinstance(value, Undefined):
        return {"undefined": value.reason}
    return value


def _render_json(doc: ReportDocument) -> bytes:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": doc.kind,
        "metadata": doc.metadata,
        "columns": [{"name": c.name, "kind": c.kind, "title": c.header()} for c in doc.columns],
        "rows": [[_json_cell(v) for v in row] for row in doc.rows],
        "extra": doc.extra,
    }
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")


def parse_report(data: bytes) -> ReportDocument:
    """Inverse of the JSON rendering; json round-trips are stable."""
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"not a JSON report: {exc}") from None
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {payload.get('schema_version')!r}")
    columns = tuple(Column(c["name"], c["kind"], c.get("title", "")) for c in payload["columns"])
    rows = tuple(
        tuple(Undefined(v["undefined"]) if isinstance(v, dict) and "undefined" in v else v for v in row)
        for row in payload["rows"]
    )
    return ReportDocument(
        kind=payload["kind"],
        columns=columns,
        rows=rows,
        metadata=payload["metadata"],
        extra=payload.get("extra", {}),
    )


def _render_tsv(doc: ReportDocument) -> bytes:
    lines = [f"# {line}" for line in _metadata_lines(doc)]
    for key, value in sorted(doc.extra.items()):
        lines.append(f"# {key}: {json.dumps(value, sort_keys=True)}")
    lines.append("\t".join(c.header() for c in doc.columns))
    for row in doc.rows:
        lines.append("\t".join(format_cell(v, c.kind) for v, c in zip(row, doc.columns)))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _render_markdown(doc: ReportDocument) -> bytes:
    best = doc.extra.get("best", {}) if doc.kind == "judge-report" else {}
    lines = [f"### {doc.kind}", ""]
    lines.append("| " + " | ".join(c.header() for c in doc.columns) + " |")
    lines.append("| " + " | ".join("---" for _ in doc.columns) + " |")
    for row in doc.rows:
        cells = []
        for value, column in zip(row, doc.columns):
            text = format_cell(value, column.kind)
            # Table-3 convention: best defined value per column in bold
            if best and column.name in best and row[0] in best[column.name] and not isinstance(value, Undefined):
                text = f"**{text}**"
            cells.append(text)
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    for line in _metadata_lines(doc):
        lines.append(f"- {line}")
    for key, value in sorted(doc.extra.items()):
        lines.append(f"- {key}: {json.dumps(value, sort_keys=True)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# document builders


def judge_report_doc(report: JudgeReport, metadata: Mapping[str, Any]) -> ReportDocument:
    columns = (Column("judge", "text", "Judge"),) + tuple(
        Column(name, "coefficient", PROFILE_TITLES[name]) for name in PROFILE_COLUMNS
    )
    rows = []
    for judge in report.judges:
        row: list[Any] = [judge]
        for name in PROFILE_COLUMNS:
            cell = report.rows[judge][name]
            row.append(cell.value if cell.defined else Undefined(cell.error or "undefined"))
        rows.append(tuple(row))
    best = {name: list(report.best.get(name, ())) for name in PROFILE_COLUMNS}
    return ReportDocument(
        kind="judge-report",
        columns=columns,
        rows=tuple(rows),
        metadata=metadata,
        extra={"best": best},
    )


def comparison_report_doc(report: ComparisonReport, metadata: Mapping[str, Any]) -> ReportDocument:
    columns = (
        Column("metric", "text", "Metric"),
        Column("direction", "text", "Direction"),
        Column("n_queries", "int", "Queries"),
        Column("n_effective", "int", "Nonzero"),
        Column("statistic", "number", "W+"),
        Column("p_raw", "pvalue", "Raw p"),
        Column("p_adjusted", "pvalue", "Adjusted p"),
        Column("rejected", "text", "Rejected"),
        Column("no_signal", "text", "No signal"),
        Column("verdict", "text", "Verdict"),
    )
    rows = tuple(
        (
            row.metric,
            row.direction,
            row.n_queries,
            row.n_effective,
            row.statistic,
            row.p_raw,
            row.p_adjusted,
            row.rejected,
            row.no_signal,
            report.verdicts[row.metric],
        )
        for row in report.rows
    )
    return ReportDocument(kind="comparison-report", columns=columns, rows=rows, metadata=metadata)


def sweep_doc(rows: Sequence[SweepRow], metadata: Mapping[str, Any]) -> ReportDocument:
    columns = (
        Column("share", "coefficient", "Share"),
        Column("observed_agreement", "coefficient", "A_o"),
        Column("kappa", "coefficient", "Cohen kappa"),
        Column("alpha", "coefficient", "Krippendorff alpha"),
        Column("ac1", "coefficient", "Gwet AC1"),
        Column("ac2_linear", "coefficient", "Gwet AC2 (lin)"),
        Column("ac2_quadratic", "coefficient", "Gwet AC2 (quad)"),
    )
    body = tuple(
        (r.share, r.observed_agreement, r.kappa, r.alpha, r.ac1, r.ac2_linear, r.ac2_quadratic)
        for r in rows
    )
    return ReportDocument(kind="sweep-table", columns=columns, rows=body, metadata=metadata)


def describe_doc(
    consolidated: ConsolidatedRatings,
    scale: OrdinalScale,
    metadata: Mapping[str, Any],
    skewness_by_metric: Mapping[str, float | Undefined],
) -> ReportDocument:
    columns = (
        Column("metric", "text", "Metric"),
        Column("n", "int", "N"),
        Column("skewness", "coefficient", "Skewness"),
    ) + tuple(Column(f"count_{lvl}", "int", f"Level {lvl}") for lvl in range(1, scale.k + 1))
    rows = []
    for metric in consolidated.metrics():
        levels = [vote.level for key, vote in sorted(consolidated.entries.items()) if key[2] == metric]
        counts = [levels.count(lvl) for lvl in range(1, scale.k + 1)]
        rows.append((metric, len(levels), skewness_by_metric[metric], *counts))
    return ReportDocument(kind="describe-table", columns=columns, rows=tuple(rows), metadata=metadata)


def diagnostics_doc(diag: MatrixDiagnostics, metadata: Mapping[str, Any]) -> ReportDocument:
    columns = (Column("property", "text", "Property"), Column("value", "text", "Value"))
    rows: list[tuple[Any, ...]] = [
        ("n_items", str(diag.n_items)),
        ("n_raters", str(diag.n_raters)),
        ("n_missing", str(diag.n_missing)),
        ("n_co_rated", str(diag.n_co_rated)),
    ]
    for level, total in enumerate(diag.category_totals, start=1):
        rows.append((f"category_{level}_total", str(total)))
    for violation in diag.violations:
        rows.append(("violation", violation))
    return ReportDocument(kind="diagnostics", columns=columns, rows=tuple(rows), metadata=metadata)
