"""CSV reading and writing of ensembles, with atomic writes."""

from __future__ import annotations

import csv
import io
import os
import tempfile

import numpy as np

from ..errors import DomainViolation
from .processes import PathEnsemble


def _g(x):
    return format(float(x), ".17g")


def atomic_write(path, text: str):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def ensemble_to_csv(e: PathEnsemble) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path_id"] + [f"t={_g(t)}" for t in e.times])
    for i, row in enumerate(e.values):
        w.writerow([i] + [_g(x) for x in row])
    return buf.getvalue()


def write_csv(e: PathEnsemble, path):
    atomic_write(path, ensemble_to_csv(e))


def read_csv(path) -> PathEnsemble:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DomainViolation(f"{path}: empty file")
    header = rows[0]
    if not header or header[0] != "path_id" or not all(h.startswith("t=") for h in header[1:]):
        raise DomainViolation(f"{path}: header must be path_id,t=<g1>,t=<g2>,...")
    times = np.array([float(h[2:]) for h in header[1:]])
    if times.size == 0 or np.any(np.diff(times) <= 0):
        raise DomainViolation(f"{path}: grid is not strictly increasing")
    body = rows[1:]
    if any(len(r) != len(header) for r in body):
        raise DomainViolation(f"{path}: ragged rows")
    values = np.array([[float(x) for x in r[1:]] for r in body]).reshape(len(body), times.size)
    return PathEnsemble(times, values)
