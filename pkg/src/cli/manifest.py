# TableGen Run Manifest
"""
Record of one CLI run: settings, inputs, outputs, metrics and timestamps.
"""

import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .. import __version__
from ..errors import DatasetIOError


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    settings: Dict[str, Any]
    seed: int
    datasets: Dict[str, str] = field(default_factory=dict)
    checkpoint: Optional[str] = None
    metrics: Dict[str, Any] = field(default_factory=dict)
    started_at: str = field(default_factory=utc_now)
    finished_at: Optional[str] = None
    version: str = __version__

    def finish(self) -> None:
        self.finished_at = utc_now()

    def write(self, path: Union[str, Path]) -> None:
        """Replace `path` atomically with the manifest as indented JSON."""
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}-")
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(asdict(self), handle, indent=2, sort_keys=True)
                handle.write("\n")
            os.replace(tmp, path)
        except OSError as e:
            raise DatasetIOError(f"Cannot write manifest {path}: {e}") from e
