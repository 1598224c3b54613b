"""
Plot-ready CSV and JSON files

Numbers are written with 17 significant digits so values survive a
write/read cycle unchanged. Every file is written once through a
temporary file in the target directory followed by os.replace.
"""

import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from pminimal.exceptions import DomainError
from pminimal.models.distortion import DISTORTION_COLUMNS, DistortionSample
from pminimal.models.profile import PROFILE_COMPLETE, ModelSurface, Profile
from pminimal.models.surface import GraphFunction
from pminimal.schemas import GraphSolveSummary, SuiteReport, _json_default

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

NUMBER_FORMAT = "%.17g"
PROFILE_FILE = "profile.csv"
PROFILE_SIDECAR = "profile.json"
SURFACE_FILE = "surface.csv"
GRAPH_FILE = "graph.csv"
GRAPH_SIDECAR = "graph.json"
DISTORTION_FILE = "distortion.csv"
REPORT_FILE = "report.json"


# ---------------------------------------------------------------------------
# Primitives
# ---------------------------------------------------------------------------

def write_text_atomic(path: PathLike, text: str) -> Path:
    """Write text to path through a temporary file and a rename"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        handle = tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", newline="\n", dir=path.parent,
            prefix=f".{path.name}.", suffix=".tmp", delete=False,
        )
        try:
            with handle:
                handle.write(text)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(handle.name, path)
        except BaseException:
            Path(handle.name).unlink(missing_ok=True)
            raise
    except OSError as e:
        raise DomainError(f"Cannot write '{path}': {e}") from e
    logger.debug("Wrote %s", path)
    return path


def write_json(path: PathLike, document: Dict[str, Any]) -> Path:
    text = json.dumps(document, indent=2, sort_keys=True, default=_json_default) + "\n"
    return write_text_atomic(path, text)


def read_json(path: PathLike) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise DomainError(f"Cannot read '{path}': {e}") from e


def write_csv(path: PathLike, columns: Sequence[str], rows: np.ndarray) -> Path:
    """Header line plus one row per record, 17 significant digits"""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != len(columns):
        raise DomainError(f"Expected {len(columns)} columns, got shape {rows.shape}")
    buffer = io.StringIO()
    np.savetxt(buffer, rows, fmt=NUMBER_FORMAT, delimiter=",", header=",".join(columns), comments="")
    return write_text_atomic(path, buffer.getvalue())


def read_csv(path: PathLike) -> Tuple[List[str], np.ndarray]:
    """Header and values of a numeric CSV file"""
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as handle:
            columns = handle.readline().strip().split(",")
            values = np.loadtxt(handle, delimiter=",", ndmin=2)
    except (OSError, ValueError) as e:
        raise DomainError(f"Cannot read '{path}': {e}") from e
    if values.size and values.shape[1] != len(columns):
        raise DomainError(f"'{path}' has {values.shape[1]} values per row for {len(columns)} columns")
    return columns, values


def _resolve(path: PathLike, default_name: str) -> Path:
    path = Path(path)
    return path / default_name if path.is_dir() else path


# ---------------------------------------------------------------------------
# Profiles and model surfaces
# ---------------------------------------------------------------------------

def profile_columns(n: int) -> List[str]:
    columns = ["tau", "R", "dR", "ddR"]
    for prefix in ("xi", "dxi", "ddxi"):
        columns += [f"{prefix}_{i + 1}" for i in range(n)]
    return columns


def write_profile(directory: PathLike, profile: Profile) -> Tuple[Path, Path]:
    """profile.csv and its profile.json sidecar"""
    directory = Path(directory)
    rows = np.column_stack([profile.tau, profile.R, profile.dR, profile.ddR, profile.xi, profile.dxi, profile.ddxi])
    csv_path = write_csv(directory / PROFILE_FILE, profile_columns(profile.n), rows)
    json_path = write_json(directory / PROFILE_SIDECAR, profile.to_dict())
    return csv_path, json_path


def read_profile(path: PathLike) -> Profile:
    """Profile from profile.csv (or a directory holding it) and the optional sidecar"""
    csv_path = _resolve(path, PROFILE_FILE)
    columns, values = read_csv(csv_path)
    if (len(columns) - 4) % 3 or len(columns) < 7:
        raise DomainError(f"'{csv_path}' is not a profile file (columns: {', '.join(columns)})")
    n = (len(columns) - 4) // 3
    if columns != profile_columns(n):
        raise DomainError(f"'{csv_path}' has unexpected columns {', '.join(columns)}")

    sidecar = csv_path.with_name(PROFILE_SIDECAR)
    meta = read_json(sidecar) if sidecar.exists() else {}
    status = meta.pop("status", PROFILE_COMPLETE)
    for key in ("n", "h", "nodes", "span"):
        meta.pop(key, None)
    return Profile(
        tau=values[:, 0], R=values[:, 1], dR=values[:, 2], ddR=values[:, 3],
        xi=values[:, 4:4 + n], dxi=values[:, 4 + n:4 + 2 * n], ddxi=values[:, 4 + 2 * n:4 + 3 * n],
        status=status,
        meta=meta,
    )


def surface_columns(n: int) -> List[str]:
    return ["tau_index", "theta_index"] + [f"x_{i + 1}" for i in range(n + 1)]


def write_surface(directory: PathLike, surface: ModelSurface) -> Path:
    """surface.csv, one row per (tau, theta) sample"""
    heights, directions, dim = surface.samples.shape
    k, j = np.meshgrid(np.arange(heights), np.arange(directions), indexing="ij")
    rows = np.column_stack([k.ravel(), j.ravel(), surface.samples.reshape(-1, dim)])
    return write_csv(Path(directory) / SURFACE_FILE, surface_columns(surface.n), rows)


def read_surface_samples(path: PathLike) -> np.ndarray:
    """Samples of surface.csv as a (heights, directions, n+1) array"""
    csv_path = _resolve(path, SURFACE_FILE)
    columns, values = read_csv(csv_path)
    if columns[:2] != ["tau_index", "theta_index"] or values.shape[0] == 0:
        raise DomainError(f"'{csv_path}' is not a surface file")
    heights = int(values[:, 0].max()) + 1
    directions = int(values[:, 1].max()) + 1
    if heights * directions != values.shape[0]:
        raise DomainError(f"'{csv_path}' does not cover a full (tau, theta) grid")
    samples = np.empty((heights, directions, values.shape[1] - 2))
    samples[values[:, 0].astype(int), values[:, 1].astype(int)] = values[:, 2:]
    return samples


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------

GRAPH_COLUMNS = ("i", "j", "x", "y", "f")


def write_graph(directory: PathLike, graph: GraphFunction, summary: Optional[GraphSolveSummary] = None) -> Path:
    """graph.csv and, when given, the solver summary in graph.json"""
    directory = Path(directory)
    if graph.n != 2:
        raise DomainError(f"Graph files hold functions of two variables, got n={graph.n}")
    size = graph.f.shape[0]
    i, j = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    x, y = graph.coordinates()
    rows = np.column_stack([i.ravel(), j.ravel(), x.ravel(), y.ravel(), graph.f.ravel()])
    path = write_csv(directory / GRAPH_FILE, GRAPH_COLUMNS, rows)
    if summary is not None:
        write_json(directory / GRAPH_SIDECAR, summary.model_dump(mode="python"))
    return path


def read_graph(path: PathLike) -> GraphFunction:
    """GraphFunction from graph.csv (or a directory holding it)"""
    csv_path = _resolve(path, GRAPH_FILE)
    columns, values = read_csv(csv_path)
    if tuple(columns) != GRAPH_COLUMNS or values.shape[0] == 0:
        raise DomainError(f"'{csv_path}' is not a graph file")
    size = int(values[:, 0].max()) + 1
    if size * size != values.shape[0] or size < 3:
        raise DomainError(f"'{csv_path}' does not cover a square grid")
    f = np.empty((size, size))
    i, j = values[:, 0].astype(int), values[:, 1].astype(int)
    f[i, j] = values[:, 4]
    x = np.empty((size, size))
    x[i, j] = values[:, 2]
    y = np.empty((size, size))
    y[i, j] = values[:, 3]
    spacing = float(x[1, 0] - x[0, 0])
    return GraphFunction(f=f, spacing=spacing, origin=(float(x[0, 0]), float(y[0, 0])))


def read_graph_summary(path: PathLike) -> Optional[GraphSolveSummary]:
    sidecar = _resolve(path, GRAPH_FILE).with_name(GRAPH_SIDECAR)
    if not sidecar.exists():
        return None
    return GraphSolveSummary.model_validate(read_json(sidecar))


# ---------------------------------------------------------------------------
# Distortion samples and reports
# ---------------------------------------------------------------------------

def write_distortion(path: PathLike, samples: List[DistortionSample]) -> Path:
    rows = np.array([[s.to_dict()[c] for c in DISTORTION_COLUMNS] for s in samples], dtype=float)
    return write_csv(path, DISTORTION_COLUMNS, rows.reshape(-1, len(DISTORTION_COLUMNS)))


def read_distortion(path: PathLike) -> List[DistortionSample]:
    columns, values = read_csv(path)
    if tuple(columns) != DISTORTION_COLUMNS:
        raise DomainError(f"'{path}' is not a distortion file")
    return [DistortionSample.from_dict(dict(zip(columns, row))) for row in values]


def write_report(path: PathLike, report: SuiteReport) -> Path:
    return write_text_atomic(path, report.to_json())


def read_report(path: PathLike) -> SuiteReport:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DomainError(f"Cannot read '{path}': {e}") from e
    return SuiteReport.from_json(text)
