import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """17 significant digits for floats (exact round trip), '-0' folded to '0'."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        return f"{value + 0.0:.17g}"
    return str(value)


class OutputStore:
    """Writes run artifacts below one output directory, in call order."""

    def __init__(self, output_dir: str):
        self.root = Path(output_dir)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.root / name

    def write_csv(
        self,
        name: str,
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
        params: Mapping[str, Any],
        summary: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        target = self.path(name)
        with target.open("w", newline="", encoding="utf-8") as f:
            f.write("# " + ",".join(columns) + "\n")
            f.write("# params: " + json.dumps(params, sort_keys=True) + "\n")
            writer = csv.writer(f, lineterminator="\n")
            count = 0
            for row in rows:
                writer.writerow([format_value(v) for v in row])
                count += 1
            if summary is not None:
                f.write("# summary: " + json.dumps(summary, sort_keys=True) + "\n")
        logger.info(f"wrote {target} ({count} rows)")
        return target

    def write_json(self, name: str, payload: Mapping[str, Any]) -> Path:
        target = self.path(name)
        with target.open("w", encoding="utf-8", newline="\n") as f:
            json.dump(payload, f, sort_keys=True, indent=2)
            f.write("\n")
        logger.info(f"wrote {target}")
        return target
