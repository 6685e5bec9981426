"""Run provenance: content hashes of inputs and outputs per command."""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping

from . import __version__


def file_digest(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    manifest_path,
    command: str,
    parameters: Mapping,
    input_paths: Iterable,
    output_paths: Iterable,
) -> dict:
    data = {
        "command": command,
        "parameters": {k: _plain(v) for k, v in sorted(parameters.items())},
        "input_digests": {str(p): file_digest(p) for p in input_paths},
        "output_digests": {Path(p).name: file_digest(p) for p in output_paths},
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as sink:
        json.dump(data, sink, indent=2, ensure_ascii=False)
        sink.write("\n")
    return data


def _plain(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value
