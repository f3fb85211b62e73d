"""CSV output.

Every file starts with two comment lines, the resolved config echoed as
inline TOML and the seeding scheme, followed by a header row. Floats are
written with ``repr`` so identical runs give byte-identical bodies.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .forms import config_comment

logger = logging.getLogger(__name__)

SEEDING_COMMENT = '# seeding = "sample i draws from Philox(SeedSequence([seed, i])); streams split by spawn"'


@dataclass
class Table:
    """A named CSV table: ``rows`` are sequences aligned with ``header``."""

    name: str
    header: list
    rows: list = field(default_factory=list)

    def add(self, *values):
        self.rows.append(list(values))


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, complex):
        return repr(value)
    return str(value)


def write_table(directory, table, config):
    """Write ``table`` to ``directory/<name>.csv`` and return the path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f'{table.name}.csv'
    with path.open('w', newline='', encoding='utf-8') as handle:
        handle.write(config_comment(config) + '\n')
        handle.write(SEEDING_COMMENT + '\n')
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([_cell(value) for value in row])
    logger.debug('wrote %d rows to %s', len(table.rows), path)
    return path


def read_table(path):
    """``(config comment line, header, rows as strings)`` of a file written by :func:`write_table`."""
    with Path(path).open(newline='', encoding='utf-8') as handle:
        comment = handle.readline().rstrip('\n')
        handle.readline()
        reader = csv.reader(handle)
        header = next(reader)
        return comment, header, list(reader)


def table_body(path):
    """Everything after the comment lines; what determinism checks compare."""
    lines = Path(path).read_text(encoding='utf-8').splitlines(keepends=True)
    return ''.join(line for line in lines if not line.startswith('#'))
