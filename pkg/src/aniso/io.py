"""Plain-text input and output: pattern CSVs, numeric grids and manifests.

Numbers are written with 17 significant digits and a dot decimal
separator regardless of locale, so a pattern written and read back is
bit-identical. Lines starting with ``#`` are metadata (window, manifest
reference) and are skipped by the readers.
"""

import hashlib
import json
import os

import numpy as np

from .geometry import PointPattern, RectWindow

__all__ = [
    "format_number",
    "write_csv",
    "read_csv",
    "write_pattern",
    "read_pattern",
    "parse_window",
    "file_digest",
    "config_hash",
    "write_json",
    "jsonable",
]


def format_number(v):
    """Shortest text form that round-trips a float (``%.17g``)."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.17g" % v


def write_csv(path, header, rows, comments=()):
    """Write a numeric table; ``rows`` is a 2D array or list of rows."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_number(v) for v in row) + "\n")


def read_csv(path):
    """Read a numeric CSV with a header line.

    Returns
    -------
    header : list of str
    data : ndarray, shape (rows, columns)
    comments : list of str
        Metadata lines without the leading ``#``.

    Raises
    ------
    ValueError
        Naming the offending line and field on malformed input.
    """
    comments, header, rows = [], None, []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            fields = [f.strip() for f in line.split(",")]
            if header is None:
                header = fields
                continue
            if len(fields) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, "
                                 f"got {len(fields)}")
            try:
                rows.append([float(f) for f in fields])
            except ValueError:
                bad = next(h for h, f in zip(header, fields) if not _is_float(f))
                raise ValueError(f"{path}:{lineno}: field {bad!r} is not a number") from None
    if header is None:
        raise ValueError(f"{path}: missing header line")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return header, data, comments


def _is_float(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def parse_window(text):
    """Window from ``"x0,x1,y0,y1"`` (or with ``z0,z1``)."""
    try:
        vals = [float(v) for v in str(text).replace(" ", "").split(",")]
    except ValueError:
        raise ValueError(f"window: cannot parse {text!r}") from None
    if len(vals) not in (4, 6):
        raise ValueError("window: give x0,x1,y0,y1 or x0,x1,y0,y1,z0,z1")
    return RectWindow(vals[0::2], vals[1::2])


def _window_text(w):
    return ",".join(format_number(v) for pair in zip(w.lo, w.hi) for v in pair)


def write_pattern(path, p, manifest=None):
    """Write a pattern CSV with its window in a ``# window:`` line."""
    comments = [f"window: {_window_text(p.window)}"]
    if manifest:
        comments.append(f"manifest: {manifest}")
    header = ["x", "y", "z"][:p.dim]
    write_csv(path, header, p.points, comments)


def read_pattern(path, window=None):
    """Read a pattern CSV.

    The window comes from the file's ``# window:`` line or from
    ``window``; when both are given they must agree.
    """
    header, data, comments = read_csv(path)
    expected = [["x", "y"], ["x", "y", "z"]]
    if [h.lower() for h in header] not in expected:
        raise ValueError(f"{path}: header must be x,y or x,y,z, got {','.join(header)}")
    file_w = None
    for c in comments:
        if c.startswith("window:"):
            file_w = parse_window(c.split(":", 1)[1])
    if isinstance(window, str):
        window = parse_window(window)
    if file_w is not None and window is not None:
        if not (np.allclose(file_w.lo, window.lo) and np.allclose(file_w.hi, window.hi)):
            raise ValueError(f"window mismatch: file has {_window_text(file_w)}, "
                             f"given {_window_text(window)}")
    w = window if window is not None else file_w
    if w is None:
        raise ValueError(f"{path}: no window line; pass the window explicitly")
    if w.dim != len(header):
        raise ValueError("window dimension does not match the coordinate columns")
    return PointPattern(data, w, metadata={"source": os.path.basename(path)})


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config):
    """SHA-256 of the canonical JSON form of a configuration dict."""
    text = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def jsonable(obj):
    """Plain-Python copy of ``obj`` for JSON; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def write_json(path, obj):
    obj = jsonable(obj)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
