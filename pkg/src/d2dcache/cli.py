"""Experiment driver: evaluate, optimize, sweep, and validate from the shell.

Configs are flat UTF-8 ``key=value`` files mirroring the SystemConfig fields
(dB variants ``tau_db``/``snr_db`` are converted at this boundary).  Every
run writes a CSV with a fixed schema plus a ``.manifest`` capturing the full
resolved configuration, seed, and library version, so results are
reproducible byte for byte.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .load import average_load_fast, average_load_enum
from .model import (
    CapacityError,
    NeighborCacheDistribution,
    Placement,
    Scheme,
    SystemConfig,
    db_to_linear,
    default_config,
)
from .montecarlo import estimate_average_load
from .optimize import (
    check_matroid_axioms,
    check_submodularity,
    exhaustive_placement,
    greedy_placement,
    high_mobility_placement,
    jensen_gap_check,
)
from .channel import success_probability, success_probability_mc

CSV_HEADER = "axis,value,scheme,method,load,load_normalized,trunc_bound,seed"

_INT_KEYS = {"F", "L", "M", "quad_nodes"}
_FLOAT_KEYS = {"gamma", "eta", "lambda", "mu", "tau", "radius", "alpha", "snr",
               "n_trunc_epsilon", "tau_db", "snr_db"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | {"scheme"}

AXES = ("snr_db", "mu", "lambda")
METHODS = ("greedy", "exhaustive", "high_mobility", "monte_carlo")
SCHEMES = {"orthogonal": Scheme.ORTHOGONAL, "non_orthogonal": Scheme.NON_ORTHOGONAL}


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def parse_config(path: str) -> SystemConfig:
    """Parse a key=value config file into a SystemConfig.

    Unknown keys, duplicate keys, malformed lines, and dB/linear conflicts
    are hard errors carrying the offending line number.
    """
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _ALL_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                if key in _INT_KEYS:
                    values[key] = int(val)
                elif key in _FLOAT_KEYS:
                    values[key] = float(val)
                else:
                    values[key] = Scheme(val)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc

    for linear, db in (("tau", "tau_db"), ("snr", "snr_db")):
        if db in values:
            if linear in values:
                raise ConfigError(f"{path}: give either {linear} or {db}, not both")
            values[linear] = db_to_linear(values.pop(db))
    if "lambda" in values:
        values["lam"] = values.pop("lambda")

    missing = {"F", "gamma", "L", "M", "eta", "lam", "mu", "tau", "radius",
               "alpha", "snr"} - values.keys()
    if missing:
        raise ConfigError(f"{path}: missing required keys: {sorted(missing)}")
    try:
        return SystemConfig(**values)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def config_lines(cfg: SystemConfig) -> list[str]:
    """Canonical key=value listing of a resolved config (linear scales)."""
    return [
        f"F={cfg.F}",
        f"gamma={_fmt(cfg.gamma)}",
        f"L={cfg.L}",
        f"M={cfg.M}",
        f"eta={_fmt(cfg.eta)}",
        f"lambda={_fmt(cfg.lam)}",
        f"mu={_fmt(cfg.mu)}",
        f"tau={_fmt(cfg.tau)}",
        f"radius={_fmt(cfg.radius)}",
        f"alpha={_fmt(cfg.alpha)}",
        f"snr={_fmt(cfg.snr)}",
        f"scheme={cfg.scheme.value}",
        f"n_trunc_epsilon={_fmt(cfg.n_trunc_epsilon)}",
        f"quad_nodes={cfg.quad_nodes}",
    ]


def write_manifest(out_path: str, cfg: SystemConfig, seed: int, command: str,
                   extra: list[str] = ()):
    lines = [f"d2dcache_version={__version__}", f"command={command}", f"seed={seed}"]
    lines += config_lines(cfg)
    lines += list(extra)
    with open(out_path + ".manifest", "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _row(axis, value, scheme, method, load, L, trunc_bound, seed) -> str:
    return ",".join([
        axis, _fmt(value), scheme, method,
        _fmt(load), _fmt(load / L), _fmt(trunc_bound), str(seed),
    ])


def write_csv(out_path: str, rows: list[str]):
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row + "\n")


@dataclass(frozen=True)
class SweepSpec:
    """One experiment grid: an axis, its values, and what to run per point."""

    axis: str
    values: tuple
    methods: tuple
    schemes: tuple

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep needs at least one axis value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("axis values must be strictly increasing")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ConfigError(f"methods must be a non-empty subset of {METHODS}")
        if not self.schemes or any(s not in SCHEMES for s in self.schemes):
            raise ConfigError(f"schemes must be a non-empty subset of {tuple(SCHEMES)}")


def apply_axis(cfg: SystemConfig, axis: str, value: float) -> SystemConfig:
    if axis == "snr_db":
        return replace(cfg, snr=db_to_linear(value))
    if axis == "mu":
        return replace(cfg, mu=value)
    return replace(cfg, lam=value)


def _placement_for(method: str, scheme: Scheme, dist, cfg):
    if method == "exhaustive":
        return exhaustive_placement(dist, cfg)
    if method == "high_mobility":
        return high_mobility_placement(scheme, dist, cfg)
    return greedy_placement(dist, cfg)[0]   # greedy and monte_carlo


def sweep_rows(spec: SweepSpec, base: SystemConfig, seed: int, trials: int):
    """Rows for every (value, scheme, method) grid point, in axis order.

    Points are evaluated concurrently; the pure computations make results
    independent of completion order, and rows are emitted in grid order.
    """
    dist = NeighborCacheDistribution.uniform(base.F, base.L)
    grid = [(vi, v, si, sname) for vi, v in enumerate(spec.values)
            for si, sname in enumerate(spec.schemes)]

    def run_point(point):
        vi, value, si, sname = point
        scheme = SCHEMES[sname]
        cfg = apply_axis(base, spec.axis, value).with_scheme(scheme)
        rows = []
        for method in spec.methods:
            placement = _placement_for(method, scheme, dist, cfg)
            if method == "monte_carlo":
                point_seed = seed + 1_000_003 * (vi * len(spec.schemes) + si)
                load, _ = estimate_average_load(placement, dist, cfg, trials, point_seed)
                bound = 0.0
            else:
                ev = average_load_fast(placement, dist, cfg)
                load, bound = ev.total, ev.truncation_bound
            rows.append(_row(spec.axis, value, sname, method, load, cfg.L, bound, seed))
        return rows

    with ThreadPoolExecutor() as pool:
        per_point = list(pool.map(run_point, grid))
    return [row for rows in per_point for row in rows]


# ---------------------------------------------------------------------------
# validate: quick oracle suites
# ---------------------------------------------------------------------------

def _suite_enum_vs_fast(cfg: SystemConfig, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        F, L = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        q = rng.random((F, L + 1))
        q /= q.sum(axis=1, keepdims=True)
        small = default_config(
            F=F, L=L, M=int(rng.integers(0, F * L + 1)),
            gamma=float(rng.random() * 2), eta=float(rng.random()),
            lam=float(rng.random()), mu=1.0, n_trunc_epsilon=1e-3,
            snr=cfg.snr, tau=cfg.tau, radius=cfg.radius, alpha=cfg.alpha,
        )
        dist = NeighborCacheDistribution(q)
        c = rng.integers(0, L + 1, F)
        while c.sum() > small.M:
            c[np.argmax(c)] -= 1
        pl = Placement(c, small)
        e = average_load_enum(pl, dist, small)
        f = average_load_fast(pl, dist, small)
        tol = 1e-9 + e.truncation_bound + f.truncation_bound
        if abs(e.total - f.total) > tol:
            return False, f"diff {abs(e.total - f.total):.3g} > tol {tol:.3g}"
    return True, "20 random instances"


def _suite_quadrature_vs_mc(cfg: SystemConfig, seed: int):
    for u in (1, 2, 3):
        exact = success_probability(u, cfg)
        est, se = success_probability_mc(u, cfg, 200_000, seed + u)
        if abs(exact - est) > 3 * max(se, 1e-12):
            return False, f"u={u}: |{exact:.6f}-{est:.6f}| > 3*{se:.2g}"
    return True, "u in {1,2,3} at 2e5 trials"


def _suite_submodularity(cfg: SystemConfig, seed: int):
    dist = NeighborCacheDistribution.uniform(cfg.F, cfg.L)
    rep = check_submodularity(dist, cfg, samples=2000, seed=seed)
    return rep.passed, f"{rep.samples} samples, {rep.violations} violations"


def _suite_matroid(cfg: SystemConfig, seed: int):
    for F in range(1, 5):
        for L in range(1, 3):
            for M in range(F * L + 1):
                rep = check_matroid_axioms(F, L, M)
                if not rep.passed:
                    return False, f"(F={F}, L={L}, M={M}): {rep.counterexample}"
    return True, "all F*L <= 8"


def _suite_jensen(cfg: SystemConfig, seed: int):
    dist = NeighborCacheDistribution.uniform(cfg.F, cfg.L)
    for mu in (1.0, 5.0, 20.0):
        c = replace(cfg, mu=mu)
        for scheme in Scheme:
            placement = greedy_placement(dist, c.with_scheme(scheme))[0]
            rep = jensen_gap_check(placement, scheme, dist, c)
            if not rep.ok:
                return False, f"mu={mu}, {scheme.value}: gap {rep.gap:.3g} > {rep.bound:.3g}"
    return True, "mu in {1,5,20}, both schemes"


VALIDATION_SUITES = [
    ("enum-vs-fast", _suite_enum_vs_fast),
    ("quadrature-vs-mc", _suite_quadrature_vs_mc),
    ("submodularity", _suite_submodularity),
    ("matroid", _suite_matroid),
    ("jensen-bound", _suite_jensen),
]


def run_validation(cfg: SystemConfig, seed: int) -> bool:
    all_ok = True
    for name, suite in VALIDATION_SUITES:
        ok, detail = suite(cfg, seed)
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        all_ok &= ok
    return all_ok


# ---------------------------------------------------------------------------
# argument parsing and entry point
# ---------------------------------------------------------------------------

def _parse_placement(text: str, cfg: SystemConfig) -> Placement:
    try:
        counts = [int(part) for part in text.split(",")]
        return Placement(counts, cfg)
    except ValueError as exc:
        raise ConfigError(f"bad --placement {text!r}: {exc}") from exc


def _parse_schemes(text: str) -> tuple:
    if text == "both":
        return tuple(SCHEMES)
    return tuple(part.strip() for part in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="d2dcache",
        description="Average BS load of a mobility-aware D2D caching system",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="key=value config file")
        p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
        p.add_argument("--out", default=None, help="output CSV path")

    p_eval = sub.add_parser("eval", help="evaluate the load of one placement")
    common(p_eval)
    p_eval.add_argument("--placement", required=True, help="comma list c1,...,cF")

    p_opt = sub.add_parser("optimize", help="optimize the placement")
    common(p_opt)
    p_opt.add_argument("--methods", default="greedy",
                       help="comma list from greedy,exhaustive,high_mobility")
    p_opt.add_argument("--schemes", default="both")

    p_sweep = sub.add_parser("sweep", help="sweep an axis and tabulate loads")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=AXES)
    p_sweep.add_argument("--values", required=True, help="comma list, increasing")
    p_sweep.add_argument("--methods", default="greedy")
    p_sweep.add_argument("--schemes", default="both")
    p_sweep.add_argument("--trials", type=int, default=10_000,
                         help="Monte Carlo trials per grid point")

    p_val = sub.add_parser("validate", help="run the oracle suites")
    p_val.add_argument("--config", required=True)
    p_val.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)

        if args.command == "validate":
            return 0 if run_validation(cfg, args.seed) else 1

        out = args.out or f"{args.command}.csv"
        if args.command == "eval":
            placement = _parse_placement(args.placement, cfg)
            ev = average_load_fast(
                placement, NeighborCacheDistribution.uniform(cfg.F, cfg.L), cfg
            )
            rows = [_row("snr_db", 10 * np.log10(cfg.snr), cfg.scheme.value,
                         "convolution", ev.total, cfg.L, ev.truncation_bound,
                         args.seed)]
            write_csv(out, rows)
            write_manifest(out, cfg, args.seed, "eval",
                           [f"placement={args.placement}"])
            print(f"load={_fmt(ev.total)} normalized={_fmt(ev.total / cfg.L)}")
            return 0

        if args.command == "optimize":
            methods = tuple(args.methods.split(","))
            bad = [m for m in methods if m not in METHODS or m == "monte_carlo"]
            if bad:
                raise ConfigError(f"cannot optimize with methods {bad}")
            schemes = _parse_schemes(args.schemes)
            dist = NeighborCacheDistribution.uniform(cfg.F, cfg.L)
            rows, extra = [], []
            for sname in schemes:
                scheme = SCHEMES[sname]
                scfg = cfg.with_scheme(scheme)
                for method in methods:
                    placement = _placement_for(method, scheme, dist, scfg)
                    ev = average_load_fast(placement, dist, scfg)
                    rows.append(_row("snr_db", 10 * np.log10(cfg.snr), sname,
                                     method, ev.total, cfg.L,
                                     ev.truncation_bound, args.seed))
                    counts = ",".join(str(x) for x in placement.c)
                    extra.append(f"placement_{method}_{sname}={counts}")
                    print(f"{sname:15s} {method:13s} load={_fmt(ev.total)} "
                          f"placement=[{counts}]")
            write_csv(out, rows)
            write_manifest(out, cfg, args.seed, "optimize", extra)
            return 0

        # sweep
        spec = SweepSpec(
            axis=args.axis,
            values=tuple(float(v) for v in args.values.split(",")),
            methods=tuple(args.methods.split(",")),
            schemes=_parse_schemes(args.schemes),
        )
        rows = sweep_rows(spec, cfg, args.seed, args.trials)
        write_csv(out, rows)
        write_manifest(out, cfg, args.seed, "sweep", [
            f"axis={spec.axis}",
            "values=" + ",".join(_fmt(v) for v in spec.values),
            "methods=" + ",".join(spec.methods),
            "schemes=" + ",".join(spec.schemes),
            f"trials={args.trials}",
        ])
        print(f"wrote {len(rows)} rows to {out}")
        return 0

    except (ConfigError, CapacityError) as exc:
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
