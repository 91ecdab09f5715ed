# Copyright 2025 Frank Sommers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Output plumbing shared by every experiment: atomic file writes, canonical CSV
and versioned JSON summaries, a small thread pool for sweeps, and SVG plots.
"""

import csv
import io
import json
import logging
import math
import os
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from config import BLAB_THREADS, SCHEMA_VERSION
from errors import ValidationError

logger = logging.getLogger(__name__)


# ==================== Atomic writes ====================

def atomic_write_bytes(path: Path, data: bytes) -> Path:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
    try:
        with os.fdopen(fd, 'wb') as fh:
            fh.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def atomic_write_text(path: Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode('utf-8'))


# ==================== CSV / JSON ====================

def _format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        return repr(value)
    if value is None:
        return ''
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValidationError(f"row {row!r} does not match header {list(header)}")
        writer.writerow([_format_cell(v) for v in row])
    return buffer.getvalue()


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return str(value)
    return value


@lru_cache(maxsize=1)
def artifact_version() -> str:
    """Short git hash of the working tree, or ``nogit`` outside a repository."""
    try:
        result = subprocess.run(
            ['git', 'rev-parse', '--short', 'HEAD'],
            capture_output=True, text=True, timeout=5,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
    except (OSError, subprocess.SubprocessError):
        return 'nogit'
    version = result.stdout.strip()
    return version if result.returncode == 0 and version else 'nogit'


@dataclass
class OutputRecord:
    """CSV rows plus the JSON summary every run emits."""
    subcommand: str
    header: List[str]
    rows: List[Sequence[Any]]
    results: Dict[str, Any] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    sort_columns: int = 0
    started: float = field(default_factory=time.perf_counter)

    def canonical_rows(self) -> List[Sequence[Any]]:
        if not self.sort_columns:
            return list(self.rows)
        return sorted(self.rows, key=lambda row: tuple(row[:self.sort_columns]))

    def summary(self) -> Dict[str, Any]:
        return _jsonable({
            'schema_version': SCHEMA_VERSION,
            'artifact_version': artifact_version(),
            'subcommand': self.subcommand,
            'config': self.config,
            'wall_time_s': time.perf_counter() - self.started,
            'created_utc': datetime.now(timezone.utc).isoformat(timespec='seconds'),
            'results': self.results,
        })

    def write(self, out_dir: Path, stem: Optional[str] = None) -> Dict[str, Path]:
        stem = stem or self.subcommand.replace('-', '_')
        out_dir = Path(out_dir)
        csv_path = atomic_write_text(out_dir / f'{stem}.csv', render_csv(self.header, self.canonical_rows()))
        json_path = atomic_write_text(
            out_dir / f'{stem}.json',
            json.dumps(self.summary(), indent=2, allow_nan=False) + '\n',
        )
        logger.info("wrote %s and %s", csv_path, json_path)
        return {'csv': csv_path, 'json': json_path}


def read_csv_columns(csv_path: Path) -> Dict[str, np.ndarray]:
    """Load a numeric CSV into column arrays; non-numeric cells are rejected."""
    csv_path = Path(csv_path)
    if not csv_path.is_file():
        raise ValidationError(f"CSV not found: {csv_path}")
    with csv_path.open(newline='', encoding='utf-8') as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{csv_path}: empty file") from None
        rows = [row for row in reader if row]
    if not header or not rows:
        raise ValidationError(f"{csv_path}: no data rows")
    columns: Dict[str, list] = {name: [] for name in header}
    for line_no, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ValidationError(f"{csv_path}:{line_no}: expected {len(header)} cells, got {len(row)}")
        for name, cell in zip(header, row):
            columns[name].append(cell)
    parsed = {}
    for name, cells in columns.items():
        try:
            parsed[name] = np.array([float(c) for c in cells])
        except ValueError:
            # label columns (e.g. block case tags) are kept as strings
            parsed[name] = np.array(cells, dtype=object)
    return parsed


# ==================== Worker pool ====================

def run_parallel(fn: Callable[[Any], Any], items: Sequence[Any], threads: Optional[int] = None) -> List[Any]:
    """Map ``fn`` over ``items`` on at most ``threads`` workers, preserving input order."""
    items = list(items)
    workers = min(threads or BLAB_THREADS, BLAB_THREADS, max(len(items), 1))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ==================== Plots ====================

PLOT_KINDS = ('loglog', 'conservation', 'linear')


def _numeric(columns: Dict[str, np.ndarray], name: str, csv_path: Path) -> np.ndarray:
    values = columns.get(name)
    if values is None:
        raise ValidationError(f"{csv_path}: missing column '{name}'")
    if values.dtype == object:
        raise ValidationError(f"{csv_path}: column '{name}' is not numeric")
    return values


def emit_plot(csv_path: Path, kind: str, out_path: Optional[Path] = None) -> Path:
    """
    Render a CSV produced by an experiment into a standalone SVG.

    Args:
        csv_path: Input CSV (first column is the abscissa)
        kind: 'loglog' (sweep with fitted slope), 'conservation' (drift vs
            time) or 'linear' (all numeric columns against the first)
        out_path: Target file; defaults to the CSV path with ``.svg``

    Returns:
        Path of the written SVG

    Raises:
        ValidationError: If the kind is unknown or the CSV is malformed
    """
    if kind not in PLOT_KINDS:
        raise ValidationError(f"unknown plot kind '{kind}'. Available kinds: {', '.join(PLOT_KINDS)}")
    csv_path = Path(csv_path)
    columns = read_csv_columns(csv_path)
    names = list(columns)
    x_name = names[0]
    x = _numeric(columns, x_name, csv_path)

    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        if kind == 'loglog':
            y_name = next((n for n in ('ratio', 'a3_norm', 'numeric_lower') if n in columns), names[1] if len(names) > 1 else None)
            if y_name is None:
                raise ValidationError(f"{csv_path}: loglog plot needs a value column")
            y = _numeric(columns, y_name, csv_path)
            keep = (x > 0) & (y > 0)
            if not np.any(keep):
                raise ValidationError(f"{csv_path}: no positive values for a log-log plot")
            ax.loglog(x[keep], y[keep], 'o-' if keep.sum() > 1 else 'o', label=y_name)
            if keep.sum() > 1:
                slope, intercept = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
                ax.loglog(x[keep], np.exp(intercept) * x[keep] ** slope, '--', label=f'slope = {slope:.3f}')
            ax.set_ylabel(y_name)
        elif kind == 'conservation':
            for name in names[1:]:
                q = _numeric(columns, name, csv_path)
                ax.plot(x, np.abs(q - q[0]) / (1.0 + abs(q[0])), label=f'{name} drift')
            ax.set_ylabel('relative drift')
        else:
            for name in names[1:]:
                if columns[name].dtype != object:
                    ax.plot(x, columns[name], 'o-' if x.size > 1 else 'o', label=name)
        ax.set_xlabel(x_name)
        ax.legend(loc='best')
        ax.grid(True, which='both', alpha=0.3)
        buffer = io.BytesIO()
        fig.savefig(buffer, format='svg')
    finally:
        plt.close(fig)

    out_path = Path(out_path) if out_path else csv_path.with_suffix('.svg')
    return atomic_write_bytes(out_path, buffer.getvalue())
