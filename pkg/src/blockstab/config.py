"""Experiment configuration: INI-style text with sections.

Example::

    [experiment]
    scenario = maxwell2d        ; maxwell2d | counterexample | abstract
    seed = 0

    [grid]
    nx = 8
    ny = 8

    [region]
    rectangles = 0.25 0.25 0.75 0.75     ; "x0 y0 x1 y1; ..." or "all"

    [materials]
    eps = 1 + 0.5*x                    ; scalar expression in x, y
    mu = 1
    sigma = 1
    sigma_outside = 0

    [scan]
    lambdas = default                  ; or a list of numbers

    [simulate]
    time_horizon = 30
    dt = auto

    [refinement]
    levels = 8 12 16

Coefficients are numbers or closed-form expressions in ``x`` and ``y``
(``I`` is the imaginary unit); ``eps_xx``/``eps_yy`` give a diagonal tensor.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path
from tokenize import TokenError

import numpy as np

SCENARIOS = ("maxwell2d", "counterexample", "abstract")


class ConfigError(ValueError):
    def __init__(self, message: str, section: str | None = None, key: str | None = None,
                 line: int | None = None):
        self.section, self.key, self.line = section, key, line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if section is not None:
            where.append(f"[{section}]" + (f" {key}" if key else ""))
        prefix = (", ".join(where) + ": ") if where else ""
        super().__init__(prefix + message)


@dataclass
class ExperimentConfig:
    scenario: str = "maxwell2d"
    nx: int = 8
    ny: int = 8
    lx: float = 1.0
    ly: float = 1.0
    region: str = "all"
    rectangles: list = field(default_factory=list)
    eps: str = "1"
    eps_xx: str | None = None
    eps_yy: str | None = None
    mu: str = "1"
    sigma: str = "1"
    sigma_outside: str = "0"
    lambda_grid: list = field(default_factory=list)
    refinements: list = field(default_factory=list)
    time_horizon: float = 30.0
    dt: float | None = None
    dt_factor: float = 0.5
    samples: int = 400
    seed: int = 0
    output_dir: str = "out"
    ratio: float = 0.5
    exponent: float = -0.5
    abstract: dict = field(default_factory=dict)
    source: str = "<defaults>"

    def levels(self) -> list[int]:
        if self.refinements:
            return list(self.refinements)
        if self.scenario == "counterexample":
            return [8, 16, 32, 64]
        return [self.nx]


def _locator(text: str):
    """Map (section, key) to the 1-based line where the key is set."""
    where: dict = {}
    sec = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            sec = m.group(1).strip().lower()
            where[(sec, None)] = i
            continue
        m = re.match(r"^([^=:;#\s][^=:]*?)\s*[=:]", line)
        if m and sec is not None:
            where[(sec, m.group(1).strip().lower())] = i
    return lambda s, k=None: where.get((s, k))


def parse_numbers(text: str, kind=float) -> list:
    toks = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    return [kind(t) for t in toks]


def parse_rectangles(text: str) -> list[tuple[float, float, float, float]]:
    rects = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        vals = parse_numbers(part)
        if len(vals) != 4:
            raise ValueError(f"rectangle needs 4 numbers 'x0 y0 x1 y1', got {part!r}")
        x0, y0, x1, y1 = vals
        if x1 < x0 or y1 < y0:
            raise ValueError(f"rectangle {part!r} has x1 < x0 or y1 < y0")
        rects.append((x0, y0, x1, y1))
    return rects


def load_config(path: str | Path | None = None, text: str | None = None) -> ExperimentConfig:
    """Parse and validate a config file (or text).  Raises :class:`ConfigError`."""
    if text is None:
        if path is None:
            return validate(ExperimentConfig())
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), line=getattr(exc, "lineno", None)) from exc
    loc = _locator(text)
    cfg = ExperimentConfig(source=str(path) if path else "<text>")

    def get(section, key, conv, target=None):
        if not cp.has_option(section, key):
            return
        raw = cp.get(section, key).strip()
        try:
            val = conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid value {raw!r}: {exc}", section, key, loc(section, key)) from exc
        setattr(cfg, target or key, val)

    known = {
        "experiment": {"scenario", "seed", "output_dir"},
        "grid": {"nx", "ny", "lx", "ly"},
        "region": {"rectangles"},
        "materials": {"eps", "eps_xx", "eps_yy", "mu", "sigma", "sigma_outside"},
        "scan": {"lambdas"},
        "simulate": {"time_horizon", "dt", "dt_factor", "samples"},
        "refinement": {"levels"},
        "classify": {"ratio", "exponent"},
        "abstract": {"n0", "n1", "rank", "dim_u"},
    }
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(f"unknown section [{sec}]", sec, line=loc(sec))
        for key in cp.options(sec):
            if key not in known[sec]:
                raise ConfigError("unknown key", sec, key, loc(sec, key))

    get("experiment", "scenario", lambda s: s.lower())
    get("experiment", "seed", int)
    get("experiment", "output_dir", str)
    get("grid", "nx", int)
    get("grid", "ny", int)
    get("grid", "lx", float)
    get("grid", "ly", float)
    if cp.has_option("region", "rectangles"):
        raw = cp.get("region", "rectangles").strip()
        if raw.lower() == "all":
            cfg.region, cfg.rectangles = "all", []
        else:
            try:
                cfg.rectangles = parse_rectangles(raw)
            except ValueError as exc:
                raise ConfigError(str(exc), "region", "rectangles", loc("region", "rectangles")) from exc
            cfg.region = "rectangles"
            if not cfg.rectangles:
                raise ConfigError("empty rectangle list", "region", "rectangles", loc("region", "rectangles"))
    for key in ("eps", "eps_xx", "eps_yy", "mu", "sigma", "sigma_outside"):
        get("materials", key, str)
    if cp.has_option("scan", "lambdas"):
        raw = cp.get("scan", "lambdas").strip()
        if raw.lower() == "default":
            cfg.lambda_grid = []
        else:
            try:
                cfg.lambda_grid = parse_numbers(raw)
            except ValueError as exc:
                raise ConfigError(f"invalid number list: {exc}", "scan", "lambdas", loc("scan", "lambdas")) from exc
            if not cfg.lambda_grid:
                raise ConfigError("lambda list is empty", "scan", "lambdas", loc("scan", "lambdas"))
    get("simulate", "time_horizon", float)
    get("simulate", "dt", lambda s: None if s.lower() == "auto" else float(s))
    get("simulate", "dt_factor", float)
    get("simulate", "samples", int)
    get("refinement", "levels", lambda s: parse_numbers(s, int), "refinements")
    get("classify", "ratio", float)
    get("classify", "exponent", float)
    if cp.has_section("abstract"):
        try:
            cfg.abstract = {k: int(v) for k, v in cp.items("abstract")}
        except ValueError as exc:
            raise ConfigError(f"integers expected: {exc}", "abstract", line=loc("abstract")) from exc
    return validate(cfg, loc)


def validate(cfg: ExperimentConfig, loc=lambda s, k=None: None) -> ExperimentConfig:
    def bad(msg, sec, key):
        raise ConfigError(msg, sec, key, loc(sec, key))

    if cfg.scenario not in SCENARIOS:
        bad(f"scenario must be one of {', '.join(SCENARIOS)}", "experiment", "scenario")
    if cfg.nx < 3 or cfg.ny < 3:
        bad("grid needs nx, ny >= 3", "grid", "nx" if cfg.nx < 3 else "ny")
    if not (cfg.lx > 0 and cfg.ly > 0):
        bad("side lengths must be positive", "grid", "lx")
    lim = 3 if cfg.scenario == "maxwell2d" else 2
    if any(lvl < lim for lvl in cfg.refinements):
        bad(f"refinement levels must be >= {lim}", "refinement", "levels")
    if not cfg.time_horizon > 0:
        bad("time_horizon must be positive", "simulate", "time_horizon")
    if cfg.dt is not None and not cfg.dt > 0:
        bad("dt must be positive or 'auto'", "simulate", "dt")
    if cfg.samples < 64:
        bad("need at least 64 samples (32 in the fit window)", "simulate", "samples")
    if not (0 < cfg.ratio <= 1):
        bad("ratio must lie in (0, 1]", "classify", "ratio")
    for key in ("eps", "eps_xx", "eps_yy", "mu", "sigma", "sigma_outside"):
        expr = getattr(cfg, key)
        if expr is None:
            continue
        try:
            coefficient(expr)
        except ValueError as exc:
            bad(str(exc), "materials", key)
    if cfg.scenario == "maxwell2d" and cfg.region == "rectangles":
        # parse-time emptiness test on every requested grid
        from .grid import RegionMask
        for lvl in cfg.levels():
            g = grid_for_level(cfg, lvl)
            if RegionMask.from_rectangles(g, cfg.rectangles).is_empty():
                bad(f"damping region contains no edges on the {g.nx}x{g.ny} grid", "region", "rectangles")
    return cfg


def grid_for_level(cfg: ExperimentConfig, level: int):
    from .grid import GridSpec
    ny = max(3, int(round(level * cfg.ny / cfg.nx)))
    return GridSpec(int(level), ny, cfg.lx, cfg.ly)


def coefficient(expr: str):
    """Number or callable ``f(x, y)`` from a closed-form expression."""
    text = expr.strip()
    for conv in (float, complex):
        try:
            return conv(text)
        except ValueError:
            pass
    import sympy

    x, y = sympy.symbols("x y", real=True)
    try:
        e = sympy.parse_expr(text, local_dict={"x": x, "y": y, "I": sympy.I, "pi": sympy.pi})
    except (sympy.SympifyError, SyntaxError, TypeError, TokenError) as exc:
        raise ValueError(f"cannot parse expression {text!r}") from exc
    extra = e.free_symbols - {x, y}
    if extra:
        raise ValueError(f"expression {text!r} uses unknown symbols {sorted(map(str, extra))}")
    f = sympy.lambdify((x, y), e, modules="numpy")

    def field_fn(xv, yv):
        return np.broadcast_to(np.asarray(f(xv, yv), dtype=complex), np.shape(xv))

    field_fn.expression = text
    return field_fn


def eps_description(cfg: ExperimentConfig):
    if cfg.eps_xx is None and cfg.eps_yy is None:
        return coefficient(cfg.eps)
    fx = coefficient(cfg.eps_xx or cfg.eps)
    fy = coefficient(cfg.eps_yy or cfg.eps)

    def tensor(xv, yv):
        out = np.zeros((np.size(xv), 2, 2), dtype=complex)
        out[:, 0, 0] = fx(xv, yv) if callable(fx) else fx
        out[:, 1, 1] = fy(xv, yv) if callable(fy) else fy
        return out

    return tensor
