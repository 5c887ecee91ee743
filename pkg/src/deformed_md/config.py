"""JSON run configurations for the CLI.

A run config is a single JSON object::

    {
      "family": "tsallis",            # required
      "params": {"q": 0.5},           # family hyperparameters
      "rule": "geg_product",          # required
      "projection": "none",
      "eta": 0.01,                    # required
      "schedule": "constant",
      "iterations": 200,              # required
      "tolerance": 1e-10,
      "problem": "quadratic",         # required
      "dimension": 5,
      "seed": 0,
      "weight_floor": 1e-12,
      "output": null
    }

A sweep config adds ``"grid": {"<hyperparameter or eta or seed>": [values...]}``.
Unknown fields are rejected.
"""

from dataclasses import asdict, dataclass, field, replace
import json
import math
import re

from .core import EntropyParams, Family, HYPERPARAMETERS
from .errors import DeformedError
from .optim import OptimizerConfig, Projection, Rule, UpdateRule
from .problems import BUILTIN


class ConfigError(DeformedError, ValueError):
    """Invalid configuration; the message names the offending line or field."""


REQUIRED = ("family", "rule", "eta", "iterations", "problem")
GRID_EXTRA_AXES = ("eta", "seed")


@dataclass(frozen=True)
class RunConfig:
    family: str
    rule: str
    eta: float
    iterations: int
    problem: str
    params: dict = field(default_factory=dict)
    projection: str = "none"
    schedule: str = "constant"
    tolerance: float = 1e-10
    dimension: int = 5
    seed: int = 0
    weight_floor: float = 1e-12
    output: str | None = None
    grid: dict | None = None

    def entropy_params(self):
        return EntropyParams.from_mapping(self.family, self.params)

    def update_rule(self):
        return UpdateRule(Rule(self.rule), Projection(self.projection))

    def optimizer_config(self):
        return OptimizerConfig(eta=self.eta, max_iters=self.iterations, grad_tol=self.tolerance,
                               weight_floor=self.weight_floor, schedule=self.schedule)

    def to_dict(self):
        d = asdict(self)
        if d["grid"] is None:
            del d["grid"]
        return d


FIELDS = tuple(RunConfig.__dataclass_fields__)


def serialize(config):
    return json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"


def _line_of(text, key):
    if text is None:
        return None
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(text, key, msg):
    line = _line_of(text, key)
    where = f"line {line}, field {key!r}" if line else f"field {key!r}"
    raise ConfigError(f"config {where}: {msg}")


def _number(text, key, value, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(text, key, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or (positive and not value > 0):
        _fail(text, key, f"expected a {'positive ' if positive else ''}finite number, got {value!r}")
    return value


def _integer(text, key, value, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(text, key, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        _fail(text, key, f"must be >= {minimum}, got {value}")
    return value


def _choice(text, key, value, options):
    if value not in options:
        _fail(text, key, f"{value!r} is not one of {sorted(options)}")
    return value


def from_dict(data, text=None, allow_grid=False):
    """Validate a decoded JSON object and build a RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    for key in data:
        if key not in FIELDS or (key == "grid" and not allow_grid):
            _fail(text, key, "unknown field")
    for key in REQUIRED:
        if key not in data:
            raise ConfigError(f"config: missing required field {key!r}")
    family = _choice(text, "family", data["family"], {f.value for f in Family})
    params = data.get("params", {})
    if not isinstance(params, dict):
        _fail(text, "params", "expected an object of hyperparameters")
    names = HYPERPARAMETERS[Family(family)]
    grid = data.get("grid")
    grid_axes = set(grid) if isinstance(grid, dict) else set()
    for key, value in params.items():
        if key not in names:
            _fail(text, key, f"{family} takes no hyperparameter {key!r} (expects {list(names)})")
        _number(text, key, value)
    missing = [n for n in names if n not in params and n not in grid_axes]
    if missing:
        _fail(text, "params", f"{family} needs hyperparameter(s) {missing}")
    params = {k: float(v) for k, v in params.items()}
    out = dict(
        family=family,
        params=params,
        rule=_choice(text, "rule", data["rule"], {r.value for r in Rule}),
        projection=_choice(text, "projection", data.get("projection", "none"),
                           {p.value for p in Projection}),
        eta=_number(text, "eta", data["eta"], positive=True),
        schedule=_choice(text, "schedule", data.get("schedule", "constant"),
                         {"constant", "inverse_sqrt"}),
        iterations=_integer(text, "iterations", data["iterations"], minimum=0),
        tolerance=_number(text, "tolerance", data.get("tolerance", 1e-10), positive=True),
        problem=_choice(text, "problem", data["problem"], set(BUILTIN)),
        dimension=_integer(text, "dimension", data.get("dimension", 5), minimum=1),
        seed=_integer(text, "seed", data.get("seed", 0), minimum=0),
        weight_floor=_number(text, "weight_floor", data.get("weight_floor", 1e-12), positive=True),
        output=data.get("output"),
    )
    if out["output"] is not None and not isinstance(out["output"], str):
        _fail(text, "output", "expected a path string or null")
    if not out["weight_floor"] <= 1e-6:
        _fail(text, "weight_floor", "must be <= 1e-6")
    if grid is not None:
        out["grid"] = _grid(text, grid, names)
    elif allow_grid:
        _fail(text, "grid", "a sweep config needs a grid object")
    if "grid" not in out:
        try:
            EntropyParams.from_mapping(family, params)
        except DeformedError as exc:
            _fail(text, "params", str(exc))
    return RunConfig(**out)


def _grid(text, grid, names):
    if not isinstance(grid, dict):
        _fail(text, "grid", "expected an object mapping axis names to lists")
    out = {}
    for key, values in grid.items():
        if key not in names and key not in GRID_EXTRA_AXES:
            _fail(text, key, f"unknown grid axis (allowed: {list(names) + list(GRID_EXTRA_AXES)})")
        if not isinstance(values, list):
            _fail(text, key, "grid axis must be a list")
        if key == "seed":
            out[key] = [_integer(text, key, v, minimum=0) for v in values]
        else:
            out[key] = [_number(text, key, v, positive=(key == "eta")) for v in values]
    return out


def parse(text, allow_grid=False):
    """Parse JSON text into a RunConfig; errors carry line/field diagnostics."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(data, text, allow_grid=allow_grid)


def load(path, allow_grid=False):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse(text, allow_grid=allow_grid)


def apply_env(config, environ):
    """DM_SEED in ``environ`` overrides the config seed."""
    raw = environ.get("DM_SEED")
    if raw is None or raw == "":
        return config
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError(f"DM_SEED must be an integer, got {raw!r}") from None
    if seed < 0:
        raise ConfigError(f"DM_SEED must be nonnegative, got {seed}")
    return replace(config, seed=seed)
