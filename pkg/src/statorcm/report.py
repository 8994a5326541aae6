"""Run report: provenance metadata, per-analysis summaries, file manifest."""
from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .config import RunConfig, config_hash, config_to_dict


def _timestamp() -> str:
    """ISO-8601 UTC; honors SOURCE_DATE_EPOCH for reproducible runs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else time.time()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


@dataclass
class Report:
    config: RunConfig
    summaries: list[dict] = field(default_factory=list)
    manifest: list[str] = field(default_factory=list)

    def add_summary(self, **kwargs) -> dict:
        self.summaries.append(kwargs)
        return kwargs

    def add_file(self, path: Path, out_dir: Path) -> Path:
        self.manifest.append(str(path.relative_to(out_dir)))
        return path

    def to_dict(self) -> dict:
        # echo the computation config only: output routing is already
        # documented by the manifest and must not break run-to-run
        # byte-identity of otherwise equal analyses
        echoed = config_to_dict(self.config)
        echoed.pop("output")
        return {
            "metadata": {
                "tool": "statorcm",
                "version": __version__,
                "config_hash": config_hash(self.config),
                "timestamp": _timestamp(),
                "synthetic_defaults": (
                    "winding parasitics and CM path impedances are synthetic "
                    "reference values, not measurements of a physical machine"
                ),
            },
            "config": echoed,
            "summaries": self.summaries,
            "manifest": sorted(self.manifest),
        }

    def write(self, out_dir: Path, name: str = "report.json") -> Path:
        path = out_dir / name
        self.manifest.append(name)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path
