"""Experiment configuration: a small ``key = value`` format with sections.

Example::

    [experiment]
    n_t = 2
    K = 2
    theta = pi/3
    snr_db = -5:5:35
    master_seed = 7

    [gmi]
    mc_samples = 2000

    [barrier]
    tau_max = 1e4

Lines starting with ``#`` or ``;`` are comments. Angles and reals accept
arithmetic on numbers and ``pi``; ``a:step:b`` expands to an inclusive grid.
"""
from __future__ import annotations

import ast
import math
import operator
from types import SimpleNamespace
from dataclasses import MISSING, dataclass, field, fields, replace

from ..alphabet import modes_for_complexity
from ..channel import CovarianceVariant
from ..gmi import SECOND_TERM_GROUPINGS
from ..optimize import BarrierConfig, Objective
from ..rates import RateMethod, SchemeKind

__all__ = ["ConfigError", "ExperimentConfig", "SDMA", "parse_config", "load_config", "dump_config"]

SDMA = "sdma"  # pseudo-scheme: the private-only mode alone


class ConfigError(ValueError):
    """Parse or validation error; the message carries the line number."""


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_real(text: str) -> float:
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        value = ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot evaluate {text!r}") from exc
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


def _int(text):
    try:
        return int(text.strip())
    except ValueError:
        raise ValueError(f"expected an integer, got {text.strip()!r}") from None


def _grid(text):
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("a range must be start:step:stop")
        start, step, stop = (_eval_real(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError("a range needs step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(start + i * step) for i in range(n))
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(_eval_real(t) for t in items)


def _names(text):
    return tuple(t.strip().lower() for t in text.split(",") if t.strip())


def _scheme(name):
    return SDMA if name == SDMA else SchemeKind.parse(name).value


@dataclass(frozen=True)
class ExperimentConfig:
    n_t: int
    K: int
    snr_db_grid: tuple
    master_seed: int
    theta: float = math.pi / 3
    delta_spread: float = math.pi / 18
    quadrature_points: int = 4096
    delta_complexity: int = 16
    realizations: int = 20
    schemes: tuple = ("cs",)
    objective: str = "sr"
    covariance_variant: str = "standard"
    sigma2: float = 1.0
    restarts: int = 3
    init_strategy: str = "mrt_plus_common"
    gmi_method: str = "exact"
    mc_samples: int = 2000
    second_term: str = "power_of_sum"
    barrier: BarrierConfig = field(default_factory=BarrierConfig)

    def __post_init__(self):
        _validate(self)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def _validate(cfg, lines=None):
    def fail(name, msg):
        where = f" (line {lines[name]})" if lines and name in lines else ""
        raise ConfigError(f"{name}: {msg}{where}")

    if cfg.n_t < 1:
        fail("n_t", "must be >= 1")
    if cfg.master_seed < 0:
        fail("master_seed", "must be >= 0")
    if cfg.K < 1:
        fail("K", "must be >= 1")
    if cfg.realizations < 1:
        fail("realizations", "must be >= 1")
    if not cfg.snr_db_grid:
        fail("snr_db", "grid must be non-empty")
    if cfg.quadrature_points < 1000:
        fail("quadrature_points", "must be >= 1000")
    if not cfg.delta_spread > 0:
        fail("delta_spread", "must be > 0")
    try:
        modes_for_complexity(cfg.delta_complexity)
    except ValueError as exc:
        fail("delta_complexity", str(exc))
    if not cfg.schemes:
        fail("schemes", "must name at least one scheme")
    for s in cfg.schemes:
        try:
            _scheme(s)
        except ValueError as exc:
            fail("schemes", str(exc))
    if len(set(cfg.schemes)) != len(cfg.schemes):
        fail("schemes", "duplicate scheme")
    for name, parse in (("objective", Objective.parse), ("covariance_variant", CovarianceVariant.parse),
                        ("gmi_method", RateMethod.parse)):
        try:
            parse(getattr(cfg, name))
        except ValueError as exc:
            fail(name, str(exc))
    if not cfg.sigma2 > 0:
        fail("sigma2", "must be > 0")
    if cfg.restarts < 1:
        fail("restarts", "must be >= 1")
    if cfg.init_strategy not in ("mrt_plus_common", "random"):
        fail("init_strategy", "must be mrt_plus_common or random")
    if cfg.mc_samples < 100:
        fail("mc_samples", "must be >= 100")
    if cfg.second_term not in SECOND_TERM_GROUPINGS:
        fail("second_term", f"must be one of {SECOND_TERM_GROUPINGS}")


# section -> key -> (field name, parser)
_SCHEMA = {
    "experiment": {
        "n_t": ("n_t", _int),
        "k": ("K", _int),
        "snr_db": ("snr_db_grid", _grid),
        "master_seed": ("master_seed", _int),
        "theta": ("theta", _eval_real),
        "delta_spread": ("delta_spread", _eval_real),
        "quadrature_points": ("quadrature_points", _int),
        "delta_complexity": ("delta_complexity", _int),
        "realizations": ("realizations", _int),
        "schemes": ("schemes", lambda t: tuple(_scheme(n) for n in _names(t))),
        "objective": ("objective", lambda t: Objective.parse(t).value),
        "covariance_variant": ("covariance_variant", lambda t: CovarianceVariant.parse(t).value),
        "sigma2": ("sigma2", _eval_real),
        "restarts": ("restarts", _int),
        "init_strategy": ("init_strategy", lambda t: t.strip().lower()),
    },
    "gmi": {
        "method": ("gmi_method", lambda t: RateMethod.parse(t).value),
        "mc_samples": ("mc_samples", _int),
        "second_term": ("second_term", lambda t: t.strip().lower()),
    },
    "barrier": {
        f.name: (f.name, _int if f.type in ("int", int) else _eval_real) for f in fields(BarrierConfig)
    },
}
_REQUIRED = ("n_t", "K", "snr_db_grid", "master_seed")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a configuration; missing optional keys get defaults.

    Raises
    ------
    ConfigError
        On syntax errors, unknown sections or keys, duplicate keys (citing
        both lines), invalid values and missing required keys.
    """
    section = None
    seen = {}  # (section, key) -> line
    values, lines = {}, {}
    barrier = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {line!r}")
            section = line[1:-1].strip().lower()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any section")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        if (section, key) in seen:
            raise ConfigError(
                f"line {lineno}: duplicate key {key!r} in [{section}] (first set on line {seen[section, key]})"
            )
        seen[section, key] = lineno
        name, parse = _SCHEMA[section][key]
        try:
            parsed = parse(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
        if section == "barrier":
            barrier[name] = parsed
        else:
            values[name] = parsed
        lines[name] = lineno

    missing = [n for n in _REQUIRED if n not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    try:
        values["barrier"] = BarrierConfig(**barrier)
    except ValueError as exc:
        raise ConfigError(f"[barrier]: {exc}") from None
    # validate with line numbers before the constructor's own check
    draft = {f.name: values[f.name] if f.name in values else _default(f) for f in fields(ExperimentConfig)}
    _validate(SimpleNamespace(**draft), lines)
    return ExperimentConfig(**draft)


def _default(f):
    return f.default_factory() if f.default is MISSING else f.default


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialize ``cfg``; ``parse_config(dump_config(cfg)) == cfg``."""
    out = []
    for section, keys in _SCHEMA.items():
        out.append(f"[{section}]")
        for key, (name, _) in keys.items():
            src = cfg.barrier if section == "barrier" else cfg
            out.append(f"{key} = {_fmt(getattr(src, name))}")
        out.append("")
    return "\n".join(out)
