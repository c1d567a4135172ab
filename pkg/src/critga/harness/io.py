"""CSV/JSON serialization of generation records and summary tables.

CSV output starts with one ``# {json}`` comment line carrying the header
object (config, seed, version), followed by an ordinary CSV table. JSON
output is a single object ``{"header": ..., "records": [...]}``.
Floats are written with ``repr`` so parsing gives back the same values.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, fields
from typing import IO, Any

from .. import __version__
from ..errors import ConfigurationError
from ..ga import GenerationRecord

COLUMNS = ("generation", "best_fitness", "mean_fitness", "p_m", "alpha", "beta",
           "population_size", "diversity", "action")
_INT_COLUMNS = {"generation", "population_size"}
_OPTIONAL_COLUMNS = {"alpha", "beta"}


def make_header(config=None, **extra) -> dict:
    from .runner import RNG_ALGORITHM

    header: dict[str, Any] = {"artifact": "critga", "version": __version__, "rng": RNG_ALGORITHM}
    if config is not None:
        header["config"] = config.to_dict()
        header["seed"] = config.seed
    header.update(extra)
    return header


def record_row(rec: GenerationRecord) -> dict:
    return {name: getattr(rec, name) for name in COLUMNS}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _typed_cell(name: str, text: str):
    if name == "action":
        return text
    if name in _OPTIONAL_COLUMNS and text == "":
        return None
    if name in _INT_COLUMNS:
        return int(text)
    return float(text)


def _check_format(fmt: str) -> str:
    fmt = fmt.lower()
    if fmt not in ("csv", "json"):
        raise ConfigurationError(f"unknown output format {fmt!r} (choose csv or json)", "format")
    return fmt


def _write(text: str, destination) -> None:
    if destination is None:
        return
    if hasattr(destination, "write"):
        destination.write(text)
        return
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(header: dict, columns, rows) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def emit(records, fmt: str = "csv", destination: str | os.PathLike | IO[str] | None = None,
         header: dict | None = None) -> str:
    """Serialize records; write to ``destination`` if given and return the text.

    Raises :class:`OSError` when the destination cannot be written.
    """
    fmt = _check_format(fmt)
    header = make_header() if header is None else header
    rows = [record_row(r) for r in records]
    if fmt == "csv":
        text = _csv_text(header, COLUMNS, rows)
    else:
        text = json.dumps({"header": header, "records": rows}, indent=1) + "\n"
    _write(text, destination)
    return text


def _read(source) -> str:
    if hasattr(source, "read"):
        return source.read()
    text = str(source)
    if "\n" in text or text.lstrip().startswith(("{", "#")):
        return text
    with open(source, encoding="utf-8") as fh:
        return fh.read()


def parse(source, fmt: str = "csv") -> tuple[dict, list[dict]]:
    """Inverse of :func:`emit`: returns ``(header, rows)`` with typed values."""
    fmt = _check_format(fmt)
    text = _read(source)
    if fmt == "json":
        doc = json.loads(text)
        return doc["header"], [{c: row[c] for c in COLUMNS} for row in doc["records"]]
    first, _, body = text.partition("\n")
    if not first.startswith("# "):
        raise ConfigurationError("CSV output must start with a '# {header}' line")
    header = json.loads(first[2:])
    reader = csv.reader(io.StringIO(body))
    columns = next(reader)
    if tuple(columns) != COLUMNS:
        raise ConfigurationError(f"unexpected CSV columns {columns}")
    rows = [{c: _typed_cell(c, v) for c, v in zip(columns, line)} for line in reader]
    return header, rows


def run_document(config, results) -> dict:
    """All replicas of one run as a JSON-ready object."""
    return {
        "header": make_header(config),
        "replicas": [
            {
                "replica": res.replica,
                "summary": asdict(res.summary),
                "records": [record_row(r) for r in res.records],
            }
            for res in results
        ],
    }


def emit_run(config, results, fmt: str = "json", destination=None) -> str:
    """Serialize a multi-replica run.

    JSON gives one document. CSV gives one record table per replica, each
    with its own header line naming the replica, concatenated in replica
    order.
    """
    fmt = _check_format(fmt)
    if fmt == "json":
        text = json.dumps(run_document(config, results), indent=1) + "\n"
    else:
        text = "".join(
            emit(res.records, "csv", header=make_header(config, replica=res.replica,
                                                        summary=asdict(res.summary)))
            for res in results
        )
    _write(text, destination)
    return text


def emit_table(rows, fmt: str = "csv", destination=None, header: dict | None = None) -> str:
    """Serialize dataclass rows (summaries or aggregates) as CSV or JSON."""
    fmt = _check_format(fmt)
    header = make_header() if header is None else header
    dicts = [asdict(r) for r in rows]
    if fmt == "csv":
        columns = [f.name for f in fields(rows[0])] if rows else []
        text = _csv_text(header, columns, dicts)
    else:
        text = json.dumps({"header": header, "rows": dicts}, indent=1) + "\n"
    _write(text, destination)
    return text
