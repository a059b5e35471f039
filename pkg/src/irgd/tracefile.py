"""Trace CSV files.

The main file has the fixed header ``k,t,f,gradnorm,errbound,evals,wall_s``
(one row per iterate, LF line endings). Audit columns live in a sidecar
``<stem>.audit.csv`` with header ``k,kind,gnorm,err,inner``.
"""

import csv
import io
import math
from pathlib import Path

from .errors import TraceFormatError
from .solvers import IterRecord, IterTrace

TRACE_HEADER = ("k", "t", "f", "gradnorm", "errbound", "evals", "wall_s")
AUDIT_HEADER = ("k", "kind", "gnorm", "err", "inner")


def audit_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".audit.csv")


def _num(v):
    return repr(float(v))


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def trace_csv_text(trace, timing=False):
    rows = [
        (r.k, _num(r.t), _num(r.f), _num(r.gradnorm), _num(r.errbound), r.evals,
         _num(r.wall_s if timing else 0.0))
        for r in trace.records
    ]
    return _csv_text(TRACE_HEADER, rows)


def audit_csv_text(trace):
    rows = [(r.k, r.kind, _num(r.gnorm), _num(r.err), _num(r.inner)) for r in trace.records]
    return _csv_text(AUDIT_HEADER, rows)


def write_trace(trace, path, timing=False):
    path = Path(path)
    path.write_text(trace_csv_text(trace, timing), newline="")
    audit_path(path).write_text(audit_csv_text(trace), newline="")
    return path


def read_trace(path):
    """Load a trace CSV (and its audit sidecar when present)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != TRACE_HEADER:
            raise TraceFormatError(f"{path}: unexpected trace header {','.join(header)}")
        rows = [row for row in reader if row]
    extra = {}
    side = audit_path(path)
    try:
        if side.exists():
            with side.open(newline="") as fh:
                reader = csv.reader(fh)
                if tuple(next(reader, ())) != AUDIT_HEADER:
                    raise TraceFormatError(f"{side}: unexpected audit header")
                for row in reader:
                    if row:
                        extra[int(row[0])] = dict(kind=row[1], gnorm=float(row[2]),
                                                  err=float(row[3]), inner=float(row[4]))
        trace = IterTrace()
        for row in rows:
            k = int(row[0])
            trace.records.append(IterRecord(
                k=k, t=float(row[1]), f=float(row[2]), gradnorm=float(row[3]),
                errbound=float(row[4]), evals=int(row[5]), wall_s=float(row[6]),
                **extra.get(k, {"gnorm": math.nan, "err": math.nan, "inner": math.nan}),
            ))
    except (ValueError, IndexError) as exc:
        if isinstance(exc, TraceFormatError):
            raise
        raise TraceFormatError(f"{path}: malformed row: {exc}") from None
    return trace
