"""Command line front end.

    tifs pressure     --system cantor --t-grid 0.5,1 --n 10
    tifs dim          --system counterexample --n-schedule 25:200:25
    tifs measure      --system cantor --t 0.63 --n 3 --out masses.csv
    tifs render       --system cantor --n 9 --out render/
    tifs verify-paper

Exit status: 0 ok, 2 configuration or domain error, 3 capacity exceeded,
4 a verification check failed.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import math
import os
import sys
import tempfile
from typing import IO, Iterator

from .config import ConfigError, RunConfig, build_system, load_config
from .dimension import branch_growth_diagnostic, solve_beta, solve_beta_star
from .errors import CapacityError, DomainError, TifsError
from .geometry import (
    box_count_dimension,
    cover_at_depth,
    sample_points,
    write_box_count_csv,
    write_cloud_csv,
    write_cover_csv,
)
from .maps import check_osc
from .measure import build_chain_measure, gib_x_check, gibbs_check, push_forward, verify_dist, write_mass_csv
from .pressure import z_level, z_star

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_VERIFY = 0, 2, 3, 4
LOG2_LOG3 = math.log(2) / math.log(3)


def fmt(x: float) -> str:
    return f"{x:.17g}"


@contextlib.contextmanager
def atomic_output(path: str | None) -> Iterator[IO[str]]:
    """Write to a temp file next to ``path`` and rename on success; stdout when ``path`` is None."""
    if path is None or path == "-":
        yield sys.stdout
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def report(line: str) -> None:
    print(line, file=sys.stderr)


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"malformed number list {text!r}") from None


def parse_ints(text: str) -> list[int]:
    """``"1,2,5"`` or an inclusive range ``"start:stop[:step]"``."""
    try:
        if ":" in text:
            parts = [int(v) for v in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1
            if step < 1:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"malformed integer list {text!r}") from None


def merge_args(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.system is not None:
        cfg.system = {"name": args.system}
    for attr in ("t", "n", "tol", "threshold", "out", "cap"):
        value = getattr(args, attr)
        if value is not None:
            setattr(cfg, attr, value)
    if args.t_grid is not None:
        cfg.t_grid = parse_floats(args.t_grid)
    if args.n_schedule is not None:
        cfg.n_schedule = parse_ints(args.n_schedule)
    if getattr(args, "kind", None) is not None:
        cfg.kind = args.kind
    return cfg.validate()


def t_values(cfg: RunConfig) -> list[float]:
    values = list(cfg.t_grid or []) or ([cfg.t] if cfg.t is not None else [])
    if not values:
        raise ConfigError("this command needs --t or --t-grid")
    return [float(t) for t in values]


def n_values(cfg: RunConfig) -> list[int]:
    if cfg.n_schedule:
        return list(cfg.n_schedule)
    if cfg.n is None:
        raise ConfigError("this command needs --n or --n-schedule")
    return list(range(1, cfg.n + 1))


def require_n(cfg: RunConfig) -> int:
    if cfg.n is None:
        raise ConfigError("this command needs --n")
    return cfg.n


def cmd_pressure(cfg: RunConfig) -> int:
    spec = build_system(cfg.system or {"name": "cantor"})
    ns = n_values(cfg)
    ts = t_values(cfg)
    # fail on capacity before any output is written
    z_level(spec, ts[0], max(ns))
    with atomic_output(cfg.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "t", "Z_n", "Z_star_n", "witness_size"])
        for t in ts:
            for n in ns:
                level = z_level(spec, t, n)
                star = z_star(spec, t, n)
                writer.writerow([n, fmt(t), fmt(level.value), fmt(star.value), star.witness_size])
    return EXIT_OK


def default_schedule(spec) -> list[int]:
    if spec.max_depth is not None:
        return list(range(1, spec.max_depth + 1))
    return [10, 20, 50, 100, 200]


def cmd_dim(cfg: RunConfig) -> int:
    spec = build_system(cfg.system or {"name": "cantor"})
    schedule = cfg.n_schedule or ([cfg.n] if cfg.n else default_schedule(spec))
    if spec.norm_oracle is None:
        osc_depth = min(8, spec.max_depth or 8)
        osc = check_osc(spec, osc_depth)
        if not osc.ok:
            report(f"warning: the open set condition fails at {len(osc.violations)} sibling pair(s) "
                   f"within depth {osc_depth}; the dimension formula assumes it")
    star = solve_beta_star(spec, cfg.tol, schedule, cfg.threshold)
    level = solve_beta(spec, cfg.tol, schedule, cfg.threshold)
    report(f"beta_star = {fmt(star.value)} (n = {star.n_used}, converged = {star.converged})")
    report(f"beta      = {fmt(level.value)} (n = {level.n_used}, converged = {level.converged})")
    for note in star.diagnostics + level.diagnostics:
        report(f"note: {note}")
    with atomic_output(cfg.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["quantity", "n", "t_n"])
        for name, est in (("beta_star", star), ("beta", level)):
            for n, t in est.history:
                writer.writerow([name, n, fmt(t)])
    return EXIT_OK


def cmd_measure(cfg: RunConfig) -> int:
    spec = build_system(cfg.system or {"name": "cantor"})
    if cfg.t is None:
        raise ConfigError("measure needs --t")
    cm = build_chain_measure(spec, cfg.t, require_n(cfg), cfg.cap or 200_000)
    with atomic_output(cfg.out) as fh:
        write_mass_csv(cm, fh)
    total = math.fsum(math.exp(v) for v in cm.log_masses.values())
    dist = verify_dist(cm)
    gibbs = gibbs_check(cm)
    ok = abs(total - 1.0) <= 1e-10 and dist.ok and gibbs.ok
    report(f"total mass = {fmt(total)}")
    report(f"mass conservation on A*: {'pass' if dist.ok else 'FAIL'} ({dist.checked} nodes)")
    report(f"Gibbs bound: {'pass' if gibbs.ok else 'FAIL'} (worst ratio {fmt(gibbs.worst_ratio)})")
    if spec.dim == 1 and check_osc(spec, cm.n).ok:
        gx = gib_x_check(push_forward(cm))
        ok = ok and gx.ok
        report(f"interval Gibbs bound: {'pass' if gx.ok else 'FAIL'} (worst slack {fmt(gx.worst_slack)})")
    report("all Gibbs checks pass" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_VERIFY


def default_scales(spec, smallest: float) -> list[float]:
    """``diam(X) s^j`` for ``j >= 1`` down to the finest scale the cover resolves."""
    s, diam = spec.contraction_bound, spec.space.diam
    scales = []
    j = 1
    while diam * s ** j >= smallest * (1 - 1e-9):
        scales.append(diam * s ** j)
        j += 1
    if len(scales) < 4 or scales[0] / scales[-1] < 100.0:
        raise ConfigError("the cover is too shallow for a box-count fit; increase --n or pass scales")
    return scales


def cmd_render(cfg: RunConfig) -> int:
    if cfg.out is None:
        raise ConfigError("render needs --out DIRECTORY")
    spec = build_system(cfg.system or {"name": "cantor"})
    n = require_n(cfg)
    cap = cfg.cap or (1 << 20)
    cover = cover_at_depth(spec, n, cap)
    scales = cfg.scales or default_scales(spec, float(cover.diameters.max()))
    os.makedirs(cfg.out, exist_ok=True)
    if cfg.kind == "cover":
        data = cover
        with atomic_output(os.path.join(cfg.out, "cover.csv")) as fh:
            write_cover_csv(cover, fh)
    else:
        data = sample_points(spec, n, cfg.anchor, cap)
        with atomic_output(os.path.join(cfg.out, "cloud.csv")) as fh:
            write_cloud_csv(data, fh)
    series = box_count_dimension(data, scales, spec.space)
    with atomic_output(os.path.join(cfg.out, "boxcount.csv")) as fh:
        write_box_count_csv(series, fh)
    with atomic_output(os.path.join(cfg.out, "slope.csv")) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["slope", "stderr", "intercept"])
        writer.writerow([fmt(series.slope), fmt(series.stderr), fmt(series.intercept)])
    report(f"box-count slope = {fmt(series.slope)} +/- {fmt(series.stderr)}")
    return EXIT_OK


def verify_counterexample(spec, horizon: int, t_grid: list[float], t_tol: float,
                          beta_star_hi: float, beta_lo: float) -> list[tuple[str, bool, str]]:
    """Run the numeric checks on the spine counterexample; one ``(name, passed, detail)`` per claim."""
    params = spec.params
    claims = []

    osc = check_osc(spec, 12)
    claims.append(("open set condition (depth 12)", osc.ok, f"{len(osc.violations)} violations"))

    growth = branch_growth_diagnostic(spec, horizon)
    claims.append(("branch growth (1/d) log #children -> 0", growth.holds, f"tail slope {growth.slope:.3g}"))

    worst = min(z_star(spec, LOG2_LOG3, n).value for n in range(1, horizon + 1))
    claims.append((f"Z*_n(log2/log3) >= 1 for n <= {horizon}", worst >= 1 - 1e-9, f"min {fmt(worst)}"))

    for t in t_grid:
        start = params.n(params.k0(t))
        low = min((z_level(spec, t, n).value for n in range(start, horizon + 1)), default=math.inf)
        claims.append((f"Z_n({t:g}) >= 1 for {start} <= n <= {horizon}", low >= 1 - 1e-9, f"min {fmt(low)}"))

    decay = z_level(spec, 1.5, horizon).value
    claims.append((f"Z_{horizon}(1.5) < 1e-3", decay < 1e-3, f"value {fmt(decay)}"))

    schedule = list(range(25, horizon + 1, 25)) or [horizon]
    if schedule[-1] != horizon:
        schedule.append(horizon)
    star = solve_beta_star(spec, t_tol, schedule)
    ok = LOG2_LOG3 - 1e-6 <= star.value <= beta_star_hi
    claims.append((f"beta* in [log2/log3 - 1e-6, {beta_star_hi:g}]", ok, f"estimate {fmt(star.value)} at n = {star.n_used}"))

    level = solve_beta(spec, t_tol, schedule)
    ok = beta_lo <= level.value <= 1.0 + t_tol
    claims.append((f"beta in [{beta_lo:g}, 1 + {t_tol:g}]", ok, f"estimate {fmt(level.value)} at n = {level.n_used}"))

    bounds_ok = all(params.t(params.k_of(n)) - t_tol <= t <= 1.0 + t_tol for n, t in level.history
                    if params.k_of(n) >= 1)
    claims.append(("level roots satisfy t_{k(n)} <= t_n <= 1", bounds_ok,
                   ", ".join(f"n={n}: {t:.4f}" for n, t in level.history)))
    return claims


def cmd_verify(cfg: RunConfig) -> int:
    system = cfg.system or {"name": "counterexample"}
    if system.get("name") != "counterexample":
        raise ConfigError("verify-paper runs on the counterexample system only")
    spec = build_system(system)
    horizon = cfg.n or 200
    t_grid = list(cfg.t_grid or [0.5, 0.8, 0.9])
    claims = verify_counterexample(spec, horizon, t_grid, cfg.tol, cfg.beta_star_hi, cfg.beta_lo)
    for name, passed, detail in claims:
        print(f"{'PASS' if passed else 'FAIL'}  {name}  [{detail}]")
    failed = [name for name, passed, _ in claims if not passed]
    print(f"{len(claims) - len(failed)}/{len(claims)} claims pass")
    return EXIT_OK if not failed else EXIT_VERIFY


COMMANDS = {
    "pressure": cmd_pressure,
    "dim": cmd_dim,
    "measure": cmd_measure,
    "render": cmd_render,
    "verify-paper": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tifs", description="Tree iterated function systems: pressure, dimension, measures.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--system", help="built-in system name (cantor, counterexample)")
        p.add_argument("--t", type=float)
        p.add_argument("--t-grid", dest="t_grid", help="comma-separated exponents")
        p.add_argument("--n", type=int)
        p.add_argument("--n-schedule", dest="n_schedule", help="comma list or start:stop[:step]")
        p.add_argument("--tol", type=float)
        p.add_argument("--threshold", type=float)
        p.add_argument("--out")
        p.add_argument("--cap", type=int)
        if name == "render":
            p.add_argument("--kind", choices=("cover", "cloud"))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_args(load_config(args.config), args)
        return COMMANDS[args.command](cfg)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (DomainError, TifsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
