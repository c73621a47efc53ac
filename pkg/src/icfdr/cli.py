"""Command-line front end: load a channel config (file or named preset),
run a sweep/region/gap computation, and emit a CSV artifact.

Exit codes: 0 success, 2 config error (including unwritable output),
3 numeric failure.  Not-applicable/+inf values serialize as empty CSV
fields; floats carry six decimals; line endings are LF.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .achievable import SamplerConfig, region_frontier
from .bounds import (
    BoundSearchConfig,
    bound_envelope,
    cutset_region_at,
    maric_sum_at,
    s1_bound_param,
)
from .gap import GapGridSpec, gap_map
from .gauss_info import DegenerateChannelError
from .model import (
    ChannelGains,
    CovarianceParams,
    NotApplicableError,
    SymmetricChannel,
    db_to_linear,
)
from .achievable import best_symmetric_lower, etw_ic_rate, symmetric_rate_cor5
from .gap import symmetric_upper
from .optim import EmptyFeasibleSetError

_SQRT5 = math.sqrt(5.0)
_SQRT10 = math.sqrt(10.0)

#: bundled example channels, one per supported command
PRESETS: dict[str, dict] = {
    "fig2": {
        "command": "sweep-bounds",
        "gains": {"h11": 1.0, "h22": 1.0, "hr2": 1.0, "hr1": 2.0, "h12": 2.0,
                  "h21": _SQRT5, "h1r": _SQRT10, "h2r": _SQRT10},
        "sweep": {"p_db_min": 0.0, "p_db_max": 50.0, "p_db_step": 5.0},
    },
    "fig3": {
        "command": "sweep-bounds",
        "gains": {"h11": 2.0, "h22": 2.0, "hr1": 0.2, "hr2": 0.2, "h12": 0.5,
                  "h21": 0.5, "h1r": 0.2, "h2r": 0.2},
        "sweep": {"p_db_min": -10.0, "p_db_max": 20.0, "p_db_step": 5.0},
    },
    "fig4": {
        "command": "region",
        "gains": {"h11": 1.0, "h22": 1.0, "hr1": 2.0, "hr2": 1.0, "h12": 2.0,
                  "h21": _SQRT5, "h1r": _SQRT10, "h2r": _SQRT10},
        "p_db": 20.0,
    },
    "fig5": {
        "command": "gap-map",
        "hd": 1.0,
        "hr": 1.0,
        "p_db": 30.0,
        "grid": {"a_min": 0.0, "a_max": 2.0, "a_steps": 21,
                 "b_min": 0.0, "b_max": 2.0, "b_steps": 21},
    },
}

_COMMANDS = ("sweep-bounds", "region", "sym-rate", "gap-map")
_BOUND_NAMES = ("cs", "m", "s1", "s2")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    gains: ChannelGains | None = None
    symmetric: SymmetricChannel | None = None
    p_db: float | None = None
    sweep: tuple[float, float, float] | None = None
    grid: GapGridSpec | None = None
    bounds_enabled: tuple[str, ...] = _BOUND_NAMES
    seed: int = 0
    out: str | None = None
    search: BoundSearchConfig = BoundSearchConfig()
    sampler: SamplerConfig = SamplerConfig()
    region_rho_points: int = 13
    region_r1_points: int = 201
    include_region_lower: bool = False


def _take(data: dict, key, expect_type, required=False, default=None):
    if key not in data:
        if required:
            raise ConfigError(f"missing config key '{key}'")
        return default
    value = data[key]
    if expect_type is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if expect_type is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if not isinstance(value, expect_type):
        raise ConfigError(f"config key '{key}' has wrong type")
    return value


def _sub_config(data: dict, key: str, cls, seed: int):
    raw = _take(data, key, dict, default=None)
    base = cls(seed=seed)
    if raw is None:
        return base
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown '{key}' keys: {sorted(unknown)}")
    return replace(base, **raw)


def build_run_config(command: str, data: dict,
                     seed_override: int | None = None,
                     out_override: str | None = None) -> RunConfig:
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command '{command}'")
    declared = _take(data, "command", str, default=command)
    if declared != command:
        raise ConfigError(f"config is for command '{declared}', not '{command}'")

    known_keys = {"command", "gains", "symmetric", "p_db", "sweep", "grid", "hd", "hr",
                  "bounds", "seed", "out", "search", "sampler",
                  "region_rho_points", "region_r1_points", "include_region_lower"}
    unknown = set(data) - known_keys
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    seed = seed_override if seed_override is not None else _take(data, "seed", int, default=0)
    out = out_override if out_override is not None else _take(data, "out", str, default=None)

    gains = symmetric = None
    if "gains" in data and "symmetric" in data:
        raise ConfigError("give either 'gains' or 'symmetric', not both")
    try:
        if "gains" in data:
            gains = ChannelGains.from_dict(_take(data, "gains", dict, required=True))
        if "symmetric" in data:
            symmetric = SymmetricChannel.from_dict(_take(data, "symmetric", dict, required=True))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    p_db = _take(data, "p_db", float, default=None)
    sweep = None
    if "sweep" in data:
        raw = _take(data, "sweep", dict, required=True)
        extra = set(raw) - {"p_db_min", "p_db_max", "p_db_step"}
        if extra:
            raise ConfigError(f"unknown sweep keys: {sorted(extra)}")
        try:
            sweep = (float(raw["p_db_min"]), float(raw["p_db_max"]), float(raw["p_db_step"]))
        except KeyError as exc:
            raise ConfigError(f"sweep needs p_db_min/p_db_max/p_db_step ({exc})") from exc
        if not (sweep[0] <= sweep[1] and sweep[2] > 0):
            raise ConfigError("sweep bounds must be ordered with a positive step")

    bounds_raw = _take(data, "bounds", list, default=list(_BOUND_NAMES))
    bad = [b for b in bounds_raw if b not in _BOUND_NAMES]
    if bad:
        raise ConfigError(f"unknown bound names: {bad}")
    bounds_enabled = tuple(b for b in _BOUND_NAMES if b in bounds_raw)

    grid = None
    if command == "gap-map":
        raw = _take(data, "grid", dict, required=True)
        extra = set(raw) - {"a_min", "a_max", "a_steps", "b_min", "b_max", "b_steps"}
        if extra:
            raise ConfigError(f"unknown grid keys: {sorted(extra)}")
        hd = _take(data, "hd", float, required=True)
        hr = _take(data, "hr", float, required=True)
        if p_db is None:
            raise ConfigError("gap-map needs 'p_db'")
        try:
            grid = GapGridSpec(
                a_min=float(raw["a_min"]), a_max=float(raw["a_max"]), a_steps=int(raw["a_steps"]),
                b_min=float(raw["b_min"]), b_max=float(raw["b_max"]), b_steps=int(raw["b_steps"]),
                hd=hd, hr=hr, p=db_to_linear(p_db),
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"invalid gap grid: {exc}") from exc

    cfg = RunConfig(
        command=command,
        gains=gains,
        symmetric=symmetric,
        p_db=p_db,
        sweep=sweep,
        grid=grid,
        bounds_enabled=bounds_enabled,
        seed=seed,
        out=out,
        search=_sub_config(data, "search", BoundSearchConfig, seed),
        sampler=_sub_config(data, "sampler", SamplerConfig, seed),
        region_rho_points=_take(data, "region_rho_points", int, default=13),
        region_r1_points=_take(data, "region_r1_points", int, default=201),
        include_region_lower=bool(_take(data, "include_region_lower", bool, default=False)),
    )
    _validate_command_inputs(cfg)
    return cfg


def _validate_command_inputs(cfg: RunConfig) -> None:
    if cfg.command == "sweep-bounds":
        if cfg.gains is None:
            raise ConfigError("sweep-bounds needs 'gains'")
        if cfg.sweep is None and cfg.p_db is None:
            raise ConfigError("sweep-bounds needs 'sweep' or 'p_db'")
    elif cfg.command == "region":
        if cfg.gains is None or cfg.p_db is None:
            raise ConfigError("region needs 'gains' and a single 'p_db'")
    elif cfg.command == "sym-rate":
        if cfg.symmetric is None:
            raise ConfigError("sym-rate needs 'symmetric'")
        if cfg.sweep is None and cfg.p_db is None:
            raise ConfigError("sym-rate needs 'sweep' or 'p_db'")


def _sweep_values(cfg: RunConfig) -> list[float]:
    if cfg.sweep is None:
        return [float(cfg.p_db)]
    lo, hi, step = cfg.sweep
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(n)]


def _fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    text = f"{x:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _csv(rows: list[list], header: str) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    return "\n".join(lines) + "\n"


def cmd_sweep_bounds(cfg: RunConfig) -> str:
    rows = []
    for p_db in _sweep_values(cfg):
        point = bound_envelope(cfg.gains, db_to_linear(p_db), cfg.search, cfg.bounds_enabled)
        rows.append([p_db, point.r_cs, point.r_m, point.r_s1, point.r_s2,
                     point.envelope, point.active])
    return _csv(rows, "p_db,r_cs,r_m,r_s1,r_s2,envelope,active")


def _covariance_samples(n: int) -> list[tuple[float, float]]:
    """Deterministic lattice over the correlation disk (outside nodes
    projected to the boundary), deduplicated."""
    axis = np.linspace(-1.0, 1.0, n)
    seen = {}
    for r1 in axis:
        for r2 in axis:
            norm = math.hypot(r1, r2)
            if norm > 1.0:
                r1n, r2n = r1 / norm, r2 / norm
            else:
                r1n, r2n = r1, r2
            seen[(round(r1n, 12), round(r2n, 12))] = (r1n, r2n)
    return sorted(seen.values())


def outer_region_curves(gains: ChannelGains, P: float,
                        search: BoundSearchConfig,
                        rho_points: int = 13,
                        r1_points: int = 201) -> dict[str, list[tuple[float, float]]]:
    """Boundaries of the three outer-bound regions: per sampled covariance
    the cut-set caps intersected with the respective sum cap, unioned over
    the shared sample set, swept along an R1 grid."""
    samples = _covariance_samples(rho_points)
    r1_caps, r2_caps, cs_sums, m_sums, s1_sums = [], [], [], [], []
    for rho1, rho2 in samples:
        cov = CovarianceParams(rho1, rho2, P, P, P)
        ev = cutset_region_at(gains, cov)
        r1_caps.append(ev.r1_cap)
        r2_caps.append(ev.r2_cap)
        cs_sums.append(ev.sum_cap)
        try:
            m_sums.append(min(ev.sum_cap, maric_sum_at(gains, cov, search)))
        except NotApplicableError:
            m_sums.append(ev.sum_cap)
        try:
            s1_sums.append(min(ev.sum_cap, s1_bound_param(gains, P, rho1, rho2)))
        except NotApplicableError:
            s1_sums.append(ev.sum_cap)
    r1_caps = np.asarray(r1_caps)
    r2_caps = np.asarray(r2_caps)
    sums = {"cs": np.asarray(cs_sums), "m": np.asarray(m_sums), "s1": np.asarray(s1_sums)}
    grid = np.unique(np.linspace(0.0, float(r1_caps.max(initial=0.0)), r1_points))
    curves: dict[str, list[tuple[float, float]]] = {}
    for label, sum_caps in sums.items():
        pts = []
        for r1 in grid:
            feas = r1 <= r1_caps + 1e-12
            if not np.any(feas):
                continue
            r2 = np.max(np.minimum(r2_caps[feas], sum_caps[feas] - r1))
            if r2 >= -1e-12:
                pts.append((float(r1), float(max(0.0, r2))))
        curves[label] = pts
    return curves


def cmd_region(cfg: RunConfig) -> str:
    P = db_to_linear(cfg.p_db)
    sampler = replace(cfg.sampler, seed=cfg.seed)
    frontier = region_frontier(cfg.gains, P, sampler)
    rows: list[list] = [[p.r1, p.r2, "ach"] for p in frontier.points]
    curves = outer_region_curves(cfg.gains, P, cfg.search,
                                 cfg.region_rho_points, cfg.region_r1_points)
    for label in ("cs", "m", "s1"):
        rows.extend([r1, r2, label] for r1, r2 in curves[label])
    return _csv(rows, "r1,r2,curve")


def cmd_sym_rate(cfg: RunConfig) -> str:
    rows = []
    for p_db in _sweep_values(cfg):
        P = db_to_linear(p_db)
        try:
            r_cor5 = symmetric_rate_cor5(cfg.symmetric, P)
        except NotApplicableError:
            r_cor5 = None
        r_ic = etw_ic_rate(cfg.symmetric.hd, cfg.symmetric.hc, P)
        lower = best_symmetric_lower(cfg.symmetric, P, cfg.include_region_lower,
                                     replace(cfg.sampler, seed=cfg.seed))
        upper = symmetric_upper(cfg.symmetric, P, cfg.search)
        rows.append([p_db, r_cor5, r_ic, lower, upper, upper - lower])
    return _csv(rows, "p_db,r_cor5,r_ic,lower,upper,delta")


def cmd_gap_map(cfg: RunConfig) -> str:
    cells = gap_map(cfg.grid, cfg.search)
    rows = [[c.a, c.b, c.upper, c.lower, c.delta, c.active_bound, c.active_lower]
            for c in cells]
    return _csv(rows, "a,b,upper,lower,delta,active_bound,active_lower")


_DISPATCH = {
    "sweep-bounds": cmd_sweep_bounds,
    "region": cmd_region,
    "sym-rate": cmd_sym_rate,
    "gap-map": cmd_gap_map,
}


def _load_data(args) -> dict:
    if args.preset is not None and args.config is not None:
        raise ConfigError("give either --config or --preset, not both")
    if args.preset is not None:
        return dict(PRESETS[args.preset])
    if args.config is None:
        raise ConfigError("one of --config or --preset is required")
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="icfdr",
        description="Bounds and achievable rates for the interference channel "
                    "with a full-duplex relay",
    )
    parser.add_argument("--version", action="version", version=f"icfdr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config path")
        p.add_argument("--preset", choices=sorted(PRESETS), help="bundled config name")
        p.add_argument("--out", help="output CSV path (default stdout)")
        p.add_argument("--seed", type=int, help="override the config seed")
    args = parser.parse_args(argv)

    try:
        data = _load_data(args)
        cfg = build_run_config(args.command, data, args.seed, args.out)
    except ConfigError as exc:
        print(f"icfdr: config error: {exc}", file=sys.stderr)
        return 2

    try:
        text = _DISPATCH[cfg.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"icfdr: config error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateChannelError, EmptyFeasibleSetError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"icfdr: numeric failure: {exc}", file=sys.stderr)
        return 3

    if cfg.out is None:
        sys.stdout.write(text)
        return 0
    try:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"icfdr: cannot write output: {exc}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    sys.exit(main())
