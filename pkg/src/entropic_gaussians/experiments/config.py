"""Experiment configuration, result rows and CSV/JSON emission."""
import csv
import dataclasses
import io
import json
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

EXPERIMENTS = ("cost_curve", "coupling_contour", "mds_embed", "cov_benchmark", "barycenter_benchmark")
SIGMA_TRUE = ("identity", "wishart")

DEFAULTS = {
    "cost_curve": {"lambdas": [i / 10 for i in range(101)]},
    "coupling_contour": {"lambdas": [0.1, 1.0, 10.0]},
    "mds_embed": {"lambdas": [0.0, 0.01, 0.05]},
    "cov_benchmark": {
        "dims": [5, 15, 30],
        "sample_sizes": [60, 120],
        "lambdas": [0.0, 0.01, 0.1, 0.5, 1.0],
        "replications": 1000,
    },
    # 0.005 and 0.05 both run: the published last row may be either.
    "barycenter_benchmark": {
        "dims": [5, 15, 30],
        "sample_sizes": [60, 120],
        "lambdas": [0.0, 0.001, 0.01, 0.025, 0.005, 0.05],
        "replications": 100,
    },
}


def _as_list(value, kind, name):
    if value is None:
        return None
    if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
        value = [value]
    try:
        out = [kind(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None
    if kind is int and any(int(v) != float(w) for v, w in zip(out, value)):
        raise ConfigError(f"{name} must contain integers")
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run.

    ``dims``, ``sample_sizes``, ``lambdas`` and ``replications`` left as
    ``None`` take the experiment's defaults. ``sigma_true``, ``m`` and
    ``grid_points`` only matter to the benchmarks, the barycenter benchmark
    and the contour grid respectively.
    """

    experiment: str
    seed: int = 0
    replications: int = None
    dims: list = None
    sample_sizes: list = None
    lambdas: list = None
    output_path: str = ""
    sigma_true: str = "identity"
    m: int = 3
    grid_points: int = 101

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
        defaults = DEFAULTS[self.experiment]
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        for name, kind in (("dims", int), ("sample_sizes", int), ("lambdas", float)):
            val = _as_list(getattr(self, name), kind, name)
            if val is None:
                val = list(defaults.get(name, []))
            set_(name, val)
        if self.replications is None:
            set_("replications", defaults.get("replications", 1))
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        set_("seed", int(self.seed))
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigError("replications must be a positive integer")
        set_("replications", int(self.replications))
        if any(not np.isfinite(v) or v < 0 for v in self.lambdas):
            raise ConfigError("lambdas must be finite and nonnegative")
        if any(d < 1 for d in self.dims) or any(s < 1 for s in self.sample_sizes):
            raise ConfigError("dims and sample_sizes must be positive")
        if self.sigma_true not in SIGMA_TRUE:
            raise ConfigError(f"sigma_true must be one of {SIGMA_TRUE}")
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError("m must be a positive integer")
        if int(self.grid_points) != self.grid_points or self.grid_points < 2:
            raise ConfigError("grid_points must be an integer >= 2")

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        if "experiment" not in data:
            raise ConfigError("config is missing 'experiment'")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def _column(name):
    return "lambda" if name == "lam" else name


@dataclass(frozen=True)
class BenchmarkRow:
    dim: int
    sample_size: int
    lam: float
    mean_error: float
    ci_halfwidth: float
    replications: int


@dataclass(frozen=True)
class CostCurveRow:
    lam: float
    total: float
    transport_term: float
    entropy_term: float = None
    relative_total: float = None


@dataclass(frozen=True)
class ContourRow:
    lam: float
    mean_x: float
    mean_y: float
    var_x: float
    var_y: float
    cross_cov: float
    x: float
    y: float
    density: float


@dataclass(frozen=True)
class MdsRow:
    lam: float
    r: int
    k: int
    x: float
    y: float


def columns(row_type):
    return [_column(f.name) for f in dataclasses.fields(row_type)]


def _plain(v):
    # NaN has no JSON spelling; both formats write it as missing.
    if isinstance(v, (float, np.floating)):
        return float(v) if np.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def to_records(rows):
    return [{_column(f.name): _plain(getattr(r, f.name)) for f in dataclasses.fields(r)} for r in rows]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_rows(rows, fmt="csv", row_type=None):
    """Serialize result rows; CSV has a header and LF line endings."""
    if row_type is None:
        if not rows:
            raise ValueError("row_type is required for an empty table")
        row_type = type(rows[0])
    records = to_records(rows)
    if fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = columns(row_type)
    writer.writerow(cols)
    for rec in records:
        writer.writerow([_cell(rec[c]) for c in cols])
    return buf.getvalue()


def write_rows(rows, path, fmt="csv", row_type=None):
    text = format_rows(rows, fmt, row_type)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text


@dataclass(frozen=True)
class OracleRow:
    var_1: float
    var_2: float
    lam: float
    cross_closed: float
    cross_oracle: float
    cross_rel_error: float
    objective_closed: float
    objective_oracle: float
    objective_rel_error: float
    logdet_coefficient: float
    iterations: int
    passed: bool
