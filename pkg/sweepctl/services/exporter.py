"""
Artifact exporter - writes CSV tables and JSON reports into a run directory
"""
import logging
from pathlib import Path
from typing import List, Optional, Set

import pandas as pd
from pydantic import BaseModel

from sweepctl.utils.formatters import CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)


class RunExporter:
    """
    Writes the artifacts of one run and remembers their names

    Artifact names are relative to the output directory so that manifests
    of identical runs in different directories are identical.
    """

    def __init__(self, output_dir: str):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: List[str] = []

    def _path(self, name: str) -> Path:
        if name not in self.artifacts:
            self.artifacts.append(name)
        return self.output_dir / name

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        """CSV with full float precision, no index, '\\n' line endings"""
        path = self._path(name)
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def write_model(self, name: str, model: BaseModel, exclude: Optional[Set[str]] = None) -> Path:
        """Pretty-printed JSON of a pydantic model; infinities become null"""
        path = self._path(name)
        path.write_text(model.model_dump_json(indent=2, exclude=exclude) + "\n", encoding="utf-8")
        logger.info(f"Wrote {path}")
        return path

    def write_manifest(self, manifest: BaseModel) -> Path:
        path = self.output_dir / "manifest.json"
        path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info(f"Wrote manifest {path}")
        return path
