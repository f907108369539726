"""
Writing and reading study results.

CSV carries a header row and 17 significant digits per float; JSON is one
object {"config": ..., "rows": [...]} that reloads to the same RunConfig
and values.
"""

import csv
import io
import json
import logging
from typing import Any, Dict, List, Optional, Tuple

from sturmasym.core.config import RunConfig
from sturmasym.core.errors import ValidationError

logger = logging.getLogger(__name__)


def _format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return '%.17g' % value
    if value is None:
        return ''
    return str(value)


class ResultsWriter:
    """Renders result rows and moves them to and from files."""

    def render(self, config: RunConfig, rows: List[Dict[str, Any]], fmt: Optional[str] = None) -> str:
        """
        Render rows as text.

        Args:
            config: Configuration that produced the rows
            rows: Result rows (dicts with the same keys)
            fmt: "csv" or "json" (default: config.fmt)
        """
        fmt = fmt or config.fmt
        if fmt == 'json':
            return json.dumps({'config': config.to_dict(), 'rows': rows}, indent=2) + '\n'
        if fmt != 'csv':
            raise ValidationError(f"unknown output format '{fmt}'")
        header: List[str] = []
        for row in rows:
            header.extend(key for key in row if key not in header)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(row.get(key)) for key in header])
        return buffer.getvalue()

    def save_to_file(self, config: RunConfig, rows: List[Dict[str, Any]], filename: str,
                     fmt: Optional[str] = None):
        """Write rendered rows to filename."""
        with open(filename, 'w', encoding='utf-8', newline='') as handle:
            handle.write(self.render(config, rows, fmt))
        logger.info("Results written to %s", filename)

    def load_from_file(self, filename: str) -> Tuple[Optional[RunConfig], List[Dict[str, Any]]]:
        """
        Read results back.

        Returns:
            (config, rows) for JSON; (None, rows of strings) for CSV
        """
        with open(filename, 'r', encoding='utf-8', newline='') as handle:
            text = handle.read()
        if text.lstrip().startswith('{'):
            data = json.loads(text)
            return RunConfig.from_dict(data['config']), data['rows']
        return None, list(csv.DictReader(io.StringIO(text)))
