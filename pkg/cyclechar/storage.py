import json
import os
from typing import Any, Dict, Optional

from .logger import logger
from .utils import ensure_dir


def to_json(report: Dict[str, Any]) -> str:
    return json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True)


def write_report(path: Optional[str], report: Dict[str, Any]) -> None:
    if not path:
        return
    parent = os.path.dirname(path)
    if parent:
        ensure_dir(parent)
    with open(path, "w", encoding="utf-8") as f:
        f.write(to_json(report) + "\n")
    logger.debug("report written: %s tasks=%d", path, len(report.get("tasks", [])))
