"""Bit-stable table emission and flat key=value config files."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Sequence

SCHEMA_VERSION = 1


def format_value(v: Any) -> str:
    """17 significant digits for floats (exact round trip), str() otherwise."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def _json_safe(v: Any) -> Any:
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render_json(command: str, header: Sequence[str], rows: Sequence[Sequence[Any]], **meta: Any) -> str:
    doc = {"schema": SCHEMA_VERSION, "command": command, **meta,
           "rows": [{k: _json_safe(v) for k, v in zip(header, row)} for row in rows]}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the target directory, then rename over ``path``.

    On any failure the temp file is removed and ``path`` is left untouched.
    """
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def read_config(path: str | os.PathLike) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, keys use '-' or '_'."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise ValueError(f"{path}:{lineno}: empty key")
            out[key.replace("-", "_")] = value
    return out
