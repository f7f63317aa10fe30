"""Output helpers: atomic writes, CSV with an embedded config header, JSON."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .errors import OutputError

CONFIG_PREFIX = "# config: "


def prepare_output_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK | os.X_OK):
        raise OutputError(f"output directory {out} is not writable")
    return out


def atomic_write_text(path, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def config_header(config: dict) -> str:
    return CONFIG_PREFIX + json.dumps(config, sort_keys=True) + "\n"


def write_csv(path, csv_text: str, config: dict) -> Path:
    return atomic_write_text(path, config_header(config) + csv_text)


def read_csv_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if not first.startswith(CONFIG_PREFIX):
        raise ValueError(f"{path} has no config header")
    return json.loads(first[len(CONFIG_PREFIX):])


def write_json(path, payload: dict, config: dict) -> Path:
    body = dict(payload)
    body["config"] = config
    return atomic_write_text(path, json.dumps(body, indent=2, sort_keys=True) + "\n")
