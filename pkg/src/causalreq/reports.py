"""Run manifests and report output helpers.

Every CLI run writes a manifest recording the inputs (with content
digests), the seed, and the package versions involved, which makes any
produced artifact reproducible from the manifest alone.
"""

from __future__ import annotations

import hashlib
import json
import os
import platform
import sys
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy
import scipy

from . import __version__


def file_digest(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(
    command: str,
    inputs: Sequence[str],
    outputs: Sequence[str],
    seed: Optional[int] = None,
    parameters: Optional[dict] = None,
) -> dict:
    return {
        "command": command,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "parameters": parameters or {},
        "inputs": [
            {"path": path, "sha256": file_digest(path)}
            for path in inputs
            if path and os.path.exists(path)
        ],
        "outputs": list(outputs),
        "versions": {
            "causalreq": __version__,
            "python": sys.version.split()[0],
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "platform": platform.platform(),
        },
    }


def write_manifest(manifest: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_text(path: str, content: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content if content.endswith("\n") else content + "\n")


def write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
