"""Point CSV reading/writing, bundled NNCT fixtures and JSON reports.

Point files are CSV with a header containing ``x``, ``y`` and ``label``
(extra columns are ignored).  Labels are mapped to class ids in order of
first appearance.  Two optional comment lines before the header pin the
class order and the study region::

    # classes: ["case", "control"]
    # region: [0, 0, 1, 1]
"""

from __future__ import annotations

import csv
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .geometry import PointSet, Rectangle
from .nnct import Nnct
from .nnct_tests import OVERALL_METHODS, _method, _jsonable, summary_tests

__all__ = ["read_points", "write_points", "FIXTURES", "load_nnct", "nnct_only_mode", "write_json", "write_csv"]

FIXTURES = ("pielou", "leukemia", "swamp")
REQUIRED = ("x", "y", "label")


def _directive(line: str, key: str):
    body = line.lstrip("#").strip()
    if not body.startswith(key + ":"):
        return None
    try:
        return json.loads(body[len(key) + 1:])
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"bad '{key}' directive: {body}") from exc


def read_points(path, region: Rectangle | None = None, classes=None) -> PointSet:
    """Parse a point CSV.  ``region`` defaults to a ``# region`` line, then to the bounding box."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    start = 0
    order = list(classes) if classes is not None else None
    while start < len(lines) and (lines[start].startswith("#") or not lines[start].strip()):
        cls = _directive(lines[start], "classes")
        box = _directive(lines[start], "region")
        if cls is not None and order is None:
            order = [str(c) for c in cls]
        if box is not None and region is None:
            region = Rectangle(*map(float, box))
        start += 1
    if start >= len(lines):
        raise InvalidInputError(f"{path}: no header line")
    reader = csv.reader(lines[start:])
    header = [h.strip().lower() for h in next(reader)]
    for col in REQUIRED:
        if col not in header:
            raise InvalidInputError(f"{path}: missing column '{col}'")
    ix, iy, il = (header.index(c) for c in REQUIRED)
    xy, raw = [], []
    for offset, row in enumerate(reader, start=start + 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < len(header):
            raise InvalidInputError(f"{path}, line {offset}: expected {len(header)} fields, got {len(row)}")
        try:
            xy.append((float(row[ix]), float(row[iy])))
        except ValueError as exc:
            raise InvalidInputError(f"{path}, line {offset}: non-numeric coordinate") from exc
        lab = row[il].strip()
        if not lab:
            raise InvalidInputError(f"{path}, line {offset}: empty label")
        raw.append(lab)
    if len(xy) < 2:
        raise InvalidInputError(f"{path}: need at least 2 points, got {len(xy)}")
    seen = list(dict.fromkeys(raw))
    if order is None:
        order = seen
    else:
        unknown = set(seen) - set(order)
        if unknown:
            raise InvalidInputError(f"{path}: labels {sorted(unknown)} not in the declared classes")
        order = [c for c in order if c in set(seen)]
    ids = {c: i for i, c in enumerate(order)}
    return PointSet(np.array(xy), np.array([ids[c] for c in raw]), region, tuple(order))


def write_points(path, ps: PointSet) -> None:
    """Write a point CSV that :func:`read_points` reads back exactly."""
    names = [str(c) for c in ps.class_names]
    r = ps.region
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# classes: {json.dumps(names)}\n")
        fh.write(f"# region: {json.dumps([r.xmin, r.ymin, r.xmax, r.ymax])}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REQUIRED)
        for (x, y), lab in zip(ps.coords, ps.labels):
            w.writerow((repr(float(x)), repr(float(y)), names[lab]))


def load_nnct(source) -> dict:
    """Load a summary fixture by name (``pielou``, ``leukemia``, ``swamp``) or path.

    Returns a dict with ``counts`` (array), ``Q``, ``R``, ``classes`` and the rest of the file.
    """
    name = str(source)
    if name in FIXTURES:
        text = resources.files("segnn.fixtures").joinpath(f"{name}_nnct.json").read_text(encoding="utf-8")
    else:
        text = Path(source).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{name}: invalid JSON ({exc})") from exc
    for key in ("counts", "Q", "R"):
        if key not in data:
            raise InvalidInputError(f"{name}: missing field '{key}'")
    data["counts"] = np.asarray(data["counts"], dtype=np.int64)
    data.setdefault("classes", [str(i) for i in range(data["counts"].shape[0])])
    return data


def nnct_only_mode(counts, Q: int, R: int, methods=OVERALL_METHODS, null_model: str = "rl",
                   strict: bool = True) -> tuple[dict, dict]:
    """Overall NNCT tests from a table and Q, R alone.

    Returns ``(results, refused)``.  With ``strict=False`` tests that need
    coordinates (covariance-based tests for q > 2) are listed in ``refused``
    with the reason instead of raising.
    """
    t = Nnct(np.asarray(counts))
    if int(R) % 2 or Q < 0:
        raise InvalidInputError("Q must be nonnegative and R even")
    results, refused = {}, {}
    for m in methods:
        key = _method(m)
        try:
            results.update(summary_tests(t, Q, R, [key], null_model))
        except InvalidInputError as exc:
            if strict or t.q == 2:
                raise
            refused[key] = str(exc)
    return results, refused


def write_json(path, report: dict) -> None:
    text = json.dumps(_jsonable(report), indent=2, ensure_ascii=False)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def write_csv(path, rows, columns) -> None:
    """Write dict rows; ``None`` cells become empty fields.  ``path`` of ``-`` means stdout."""
    fh = sys.stdout if path in (None, "-") else open(path, "w", encoding="utf-8", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow(["" if row.get(c) is None else row.get(c) for c in columns])
    finally:
        if fh is not sys.stdout:
            fh.close()
