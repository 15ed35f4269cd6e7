"""Benchmark orchestration: seeded bilinear games, one run per method, CSV out.

For each dimension ``d = 2m`` a random bilinear game with condition number
``cond`` is built, every method's hyperparameters are derived from the game's
exact singular values, and all methods start from the same ``w0``. Tables
are written with a fixed column order and a fixed float format so that the
same seed always yields byte-identical files.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import SpectralGamesError
from .games import make_bilinear
from .methods import Family, MethodSpec, derive_params, run

# Column name -> family, in output order.
METHOD_COLUMNS = {
    "extragradient": Family.EXTRAGRADIENT,
    "hgd": Family.HGD,
    "neg_momentum": Family.NEG_MOMENTUM_ALT,
    "omd": Family.OMD,
    "accel_bilinear": Family.BILINEAR_ACCEL,
    "accel_eg": Family.EG_MOMENTUM,
    "accel_consensus": Family.CONSENSUS_MOMENTUM,
}
DEFAULT_METHODS = tuple(METHOD_COLUMNS)
FLOAT_FORMAT = "{:.17g}"


@dataclass
class BenchConfig:
    dims: list = field(default_factory=lambda: [100, 500, 1000])
    cond: float = 100.0
    iters: int = 1000
    seed: int = 0
    methods: list = field(default_factory=lambda: list(DEFAULT_METHODS))
    output_dir: str = "."
    emit_plot: bool = False
    jobs: int = 1
    # "column.param" -> value, applied after derivation
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dims = [int(d) for d in self.dims]
        if not self.dims:
            raise ValueError("dims must be non-empty")
        for d in self.dims:
            if d < 4 or d % 2:
                raise ValueError(f"dimension {d} must be even and at least 4")
        if int(self.iters) < 1:
            raise ValueError("iters must be at least 1")
        self.iters = int(self.iters)
        self.methods = list(self.methods)
        if not self.methods:
            raise ValueError("methods must be non-empty")
        unknown = [m for m in self.methods if m not in METHOD_COLUMNS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {list(METHOD_COLUMNS)}")
        if not self.cond >= 1:
            raise ValueError("cond must be >= 1")
        for key in self.overrides:
            col, _, param = key.partition(".")
            if col not in METHOD_COLUMNS or not param:
                raise ValueError(f"bad override key {key!r}; expected <method>.<param>")


@dataclass
class BenchResult:
    dim: int
    columns: list
    table: np.ndarray  # (iters + 1, 1 + len(methods)); column 0 is the iteration
    metadata: dict

    def to_csv(self) -> str:
        return format_csv(self.columns, self.table)


def _parse_value(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; lists are comma separated."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key in ("dims", "methods"):
            out[key] = [_parse_value(v) for v in value.split(",") if v.strip()]
        else:
            out[key] = _parse_value(value)
    return out


def config_from_mapping(values: dict) -> BenchConfig:
    known = {f for f in BenchConfig.__dataclass_fields__ if f != "overrides"}
    kwargs, overrides = {}, {}
    for key, value in values.items():
        if key in known:
            kwargs[key] = value
        elif "." in key:
            overrides[key] = float(value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return BenchConfig(overrides=overrides, **kwargs)


def method_specs(cfg: BenchConfig, sigma_min: float, sigma_max: float) -> tuple[dict, dict]:
    """Hyperparameters per column from the game's singular values.

    Returns ``(specs, errors)``; a column whose derivation fails is reported
    in ``errors`` and left out of ``specs`` instead of aborting the run.
    """
    specs, errors = {}, {}
    for col in cfg.methods:
        fam = METHOD_COLUMNS[col]
        extra = {k.split(".", 1)[1]: v for k, v in cfg.overrides.items() if k.split(".", 1)[0] == col}
        try:
            if fam is Family.CONSENSUS_MOMENTUM:
                specs[col] = derive_params(fam, gamma=sigma_min, mu=0.0, L=sigma_max, **extra)
            else:
                specs[col] = derive_params(fam, a=sigma_min, b=sigma_max, **extra)
        except SpectralGamesError as exc:
            errors[col] = str(exc)
    return specs, errors


def _run_column(spec, game, iters):
    trace = run(spec, game, game.omega0, iters)
    col = np.full(iters + 1, np.nan)
    col[: trace.distances.size] = trace.distances
    if trace.diverged:
        col[trace.distances.size - 1 :] = np.nan
    return col, trace.diverged


def _run_dim(dim: int, cfg: BenchConfig, specs: dict | None = None) -> BenchResult:
    start = time.perf_counter()
    game = make_bilinear(dim // 2, cfg.cond, cfg.seed)
    smin, smax = game.singular_bounds
    errors = {}
    if specs is None:
        specs, errors = method_specs(cfg, smin, smax)
    table = np.full((cfg.iters + 1, 1 + len(cfg.methods)), np.nan)
    table[:, 0] = np.arange(cfg.iters + 1)
    runnable = [c for c in cfg.methods if c in specs]

    def job(col):
        return _run_column(specs[col], game, cfg.iters)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            outputs = list(pool.map(job, runnable))
    else:
        outputs = [job(c) for c in runnable]
    diverged = {}
    for col, (values, div) in zip(runnable, outputs):
        table[:, 1 + cfg.methods.index(col)] = values
        diverged[col] = div
    metadata = {
        "dim": dim,
        "m": dim // 2,
        "cond": cfg.cond,
        "iters": cfg.iters,
        "seed": cfg.seed,
        "sigma_min": smin,
        "sigma_max": smax,
        "methods": {
            col: {"family": specs[col].family.value, "hyper": dict(specs[col].hyper),
                  "f_evals_per_iter": specs[col].f_evals_per_iter}
            for col in runnable
        },
        "columns": list(cfg.methods),
        "diverged": diverged,
        "errors": errors,
        "wall_time_s": time.perf_counter() - start,
    }
    return BenchResult(dim=dim, columns=["iteration", *cfg.methods], table=table, metadata=metadata)


def run_benchmark(cfg: BenchConfig) -> list:
    return [_run_dim(d, cfg) for d in cfg.dims]


def format_csv(columns, table) -> str:
    lines = [",".join(columns)]
    for row in table:
        cells = [str(int(row[0]))] + [FLOAT_FORMAT.format(v) for v in row[1:]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> tuple[list, np.ndarray]:
    lines = text.rstrip("\n").split("\n")
    columns = lines[0].split(",")
    table = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    return columns, table.reshape(len(lines) - 1, len(columns))


def write_result(result: BenchResult, csv_path, meta_path=None) -> Path:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        fh.write(result.to_csv())
    meta_path = csv_path.with_suffix(".json") if meta_path is None else Path(meta_path)
    meta = dict(result.metadata, csv=csv_path.name)
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv_path


def rerun_from_metadata(meta_path) -> BenchResult:
    """Rebuild a table from a sidecar alone, using its recorded hyperparameters."""
    meta = json.loads(Path(meta_path).read_text())
    cfg = BenchConfig(dims=[meta["dim"]], cond=meta["cond"], iters=meta["iters"], seed=meta["seed"],
                      methods=meta["columns"])
    specs = {col: MethodSpec(Family(m["family"]), m["hyper"]) for col, m in meta["methods"].items()}
    return _run_dim(meta["dim"], cfg, specs)


def first_hit(distances, threshold: float) -> int | None:
    """First iteration with distance at or below ``threshold``, or ``None``."""
    d = np.asarray(distances, dtype=float)
    idx = np.flatnonzero(d <= threshold)
    return int(idx[0]) if idx.size else None


# Plot colors per column, cycled for unknown names.
_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]


def render_svg(result: BenchResult, width: int = 640, height: int = 420) -> str:
    """Distance to the optimum against iterations, log-scale y, one polyline per method."""
    data = result.table[:, 1:]
    finite = data[np.isfinite(data) & (data > 0)]
    if finite.size == 0:
        raise ValueError("nothing to plot")
    lo = math.floor(math.log10(finite.min()))
    hi = math.ceil(math.log10(finite.max()))
    if hi == lo:
        hi += 1
    left, right, top, bottom = 70, 160, 30, 50
    pw, ph = width - left - right, height - top - bottom
    n = max(result.table.shape[0] - 1, 1)

    def xy(i, v):
        x = left + pw * i / n
        y = top + ph * (hi - math.log10(v)) / (hi - lo)
        return f"{x:.2f},{y:.2f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for k in range(lo, hi + 1):
        y = top + ph * (hi - k) / (hi - lo)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" font-size="11" text-anchor="end">1e{k}</text>')
    for frac in (0, 0.25, 0.5, 0.75, 1):
        x = left + pw * frac
        out.append(f'<text x="{x:.2f}" y="{top + ph + 16}" font-size="11" text-anchor="middle">{round(n * frac)}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" font-size="12" text-anchor="middle">iteration</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2})">distance to the optimum</text>'
    )
    for j, name in enumerate(result.columns[1:]):
        color = _COLORS[j % len(_COLORS)]
        col = data[:, j]
        pts = [xy(i, v) for i, v in enumerate(col) if np.isfinite(v) and v > 0]
        if pts:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(pts)}">'
                       f"<title>{name}</title></polyline>")
        ly = top + 14 + 16 * j
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly + 4}" font-size="11">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(result: BenchResult, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_svg(result))
    return path


def config_dict(cfg: BenchConfig) -> dict:
    return asdict(cfg)
