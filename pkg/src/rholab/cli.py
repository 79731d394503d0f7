"""Command-line entry point.

Every subcommand appends one JSON record to the results file and prints a
table (``--csv`` for comma-separated output). ``replay`` re-runs a record and
checks that its outputs come back identical.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import fourier, mixing_lab, rho_solver, spectral, sst
from .modmath import GroupInstance, check_odd_modulus
from .rho_walk import PartitionMode, WalkParams
from .rng import fresh_seed

SCHEMA_ID = "rholab.record/1"
DEFAULT_OUT = "results/records.jsonl"
OUT_ENV = "RHO_LAB_OUT"


def default_out() -> str:
    return os.environ.get(OUT_ENV, DEFAULT_OUT)


# ---------------------------------------------------------------- commands
# Each command maps (parameters, seed) to (outputs, table rows, summary lines).


def cmd_solve(prm: dict, seed: int):
    inst = GroupInstance(prm["q"], prm["p"], prm["x"], prm["y"])
    res = rho_solver.solve_detailed(inst, seed, prm["max_attempts"], PartitionMode(prm["partition"]))
    ev = res.collision
    out = {
        "k": res.k,
        "attempts": res.attempts,
        "degenerate": res.degenerate,
        "collision": {
            "first_index": ev.first_index,
            "second_index": ev.second_index,
            "element": ev.state,
            "first_tag": list(ev.first_tag),
            "second_tag": list(ev.second_tag),
        },
    }
    rows = [{"q": inst.q, "p": inst.p, "x": inst.x, "y": inst.y, "k": res.k,
             "attempts": res.attempts, "collision_step": ev.second_index}]
    return out, rows, [f"k = {res.k}"]


def cmd_collide(prm: dict, seed: int):
    params = WalkParams(prm["p"], prm["k"])
    stats = rho_solver.collision_experiment(params, prm["c"], prm["trials"], seed)
    out = stats.to_dict()
    rows = [{"p": params.p, "k": params.k, **{k: out[k] for k in (
        "c", "trials", "tau_half", "bound", "fraction_within_bound", "floor", "sigma", "median_steps")}}]
    verdict = "PASS" if stats.passes else "FAIL"
    return out, rows, [f"{verdict}: fraction {stats.fraction_within_bound:.4f} "
                       f">= 1 - e^-c - 3 sigma = {stats.floor - 3 * stats.sigma:.4f}"]


def cmd_mix(prm: dict, seed: int):
    eps = prm["eps"]
    if prm["block"]:
        rep = mixing_lab.block_mixing_report(prm["p"], eps, prm["max_steps"])
        m = fourier.bit_count_exponent(prm["p"])
        budget = mixing_lab.block_mixing_budget(m, eps) if m > 1 and eps < 1 else None
    else:
        rep = mixing_lab.tau_s(WalkParams(prm["p"], prm["k"]), eps, prm["max_steps"], prm["power"])
        budget = None
    out = rep.to_dict()
    if budget is not None:
        out["block_budget"] = budget
    rows = [{"t": t, "sep_worst_start": s, "sep_max": mx}
            for t, (s, mx) in enumerate(zip(rep.sep_curve, rep.max_sep_curve))]
    return out, rows, [f"tau_s({eps}) = {rep.tau}  ({rep.walk}, worst start {rep.worst_start})"]


def cmd_spectral(prm: dict, seed: int):
    p = check_odd_modulus(prm["p"])
    k = prm["k"] if prm["k"] is not None else p - 1
    eps = prm["eps"]
    bounds = spectral.gap_bounds(p)
    out = {"p": p, "k": k, "epsilon": eps, **bounds.to_dict()}
    if p <= spectral.MAX_DENSE_P:
        cong = spectral.congestion(p)
        gap_k = spectral.exact_gap("K", p, "dirichlet")
        gap_r2 = spectral.exact_gap("R_squared", p, "pp_star", k=k)
        fill_r2 = spectral.fill_bound(gap_r2, 1 / p, eps)
        params = WalkParams(p, k)
        tau_r = mixing_lab.tau_s(params, eps).tau
        tau_r2 = mixing_lab.tau_s(params, eps, power=2).tau
        replay_ok = all(
            spectral.replay_path(x, spectral.canonical_path(x, y, p), p) == y
            for x in range(p) for y in range(p)
        )
        out.update({
            "congestion": cong,
            "fill_tau": spectral.fill_bound(bounds.lambda_R2_bound, 1 / p, eps),
            "gap_K_dirichlet": gap_k,
            "gap_R2_pp_star": gap_r2,
            "fill_bound_R2_exact_gap": fill_r2,
            "tau_R": tau_r,
            "tau_R2": tau_r2,
            "paths_replay": replay_ok,
            "checks": {
                "congestion_le_2n2": cong <= 2 * spectral.path_length(p) ** 2,
                "paths_bound_le_gap_K": 1 / cong <= gap_k + 1e-8,
                "gap_K_ge_lemma": gap_k >= bounds.lambda_K_bound - 1e-8,
                "comparison": gap_r2 >= spectral.COMPARISON_CONSTANT * gap_k - 1e-8,
                "fill_R2": tau_r2 <= fill_r2,
                "fill_R": tau_r <= 2 * fill_r2,
            },
        })
    else:
        out["fill_tau"] = spectral.fill_bound(bounds.lambda_R2_bound, 1 / p, eps)
    rows = [{k2: v for k2, v in out.items() if not isinstance(v, dict)}]
    summary = [f"{name}: {'ok' if ok else 'VIOLATED'}" for name, ok in out.get("checks", {}).items()]
    return out, rows, summary


def cmd_sst(prm: dict, seed: int):
    params = sst.SstParams(prm["m"], prm["k"] if prm["k"] is not None else (1 << prm["m"]) - 2, prm["r"])
    p = params.p
    Ts, Ys = sst.sample_stopping_times(params, prm["trials"], seed)
    t_max = int(Ts.max())
    exact = mixing_lab.separation_curve(WalkParams(p, params.k), t_max, start=0)
    grid = []
    for t in range(t_max + 1):
        est = sst.tail_from_samples(Ts, t)
        grid.append({"t": t, "sep_exact": exact[t], "tail": est.estimate, "half_width": est.half_width})
    sst_ok = all(g["sep_exact"] <= g["tail"] + 3 * g["half_width"] for g in grid)

    r_budget, budget = sst.sst_budget(params.m)
    n = len(Ts)
    within = float(np.mean(Ts <= budget))
    census_r = prm["census_r"] or params.r
    census = sst.superround_census(sst.SstParams(params.m, params.k, census_r), prm["census_rounds"], seed)
    expected_undef = (7 / 9) ** census_r
    cells = census.rounds * census.m
    sigma_undef = math.sqrt(expected_undef * (1 - expected_undef) / cells)
    sigma_fair = math.sqrt(0.25 / census.defined) if census.defined else math.inf
    hist = np.bincount(Ys, minlength=p) / n
    tv = 0.5 * float(np.sum(np.abs(hist - 1 / p)))
    out = {
        "p": p, "m": params.m, "k": params.k, "r": params.r, "trials": n,
        "mean_T": float(Ts.mean()),
        "tail_grid": grid,
        "sst_inequality": sst_ok,
        "budget": {"r": r_budget, "steps": budget, "fraction_within": within,
                   "sigma": math.sqrt(0.25 / n), "passes": within > 0.5 - 3 * math.sqrt(0.25 / n)},
        "census": {"rounds": census.rounds, "r": census_r, "undefined_rate": census.undefined_rate,
                   "expected": expected_undef, "sigma": sigma_undef,
                   "passes": abs(census.undefined_rate - expected_undef) <= 3 * sigma_undef,
                   "ones_fraction": census.ones / census.defined if census.defined else None,
                   "fair": abs(census.ones / census.defined - 0.5) <= 3 * sigma_fair if census.defined else None},
        "y_at_T_tv": tv,
    }
    rows = [{"t": g["t"], "sep_exact": g["sep_exact"], "pr_T_gt_t": g["tail"], "half_width": g["half_width"]}
            for g in grid[:: max(1, len(grid) // 40)]]
    summary = [
        f"SST inequality on t = 0..{t_max}: {'ok' if sst_ok else 'VIOLATED'}",
        f"Pr[T <= {budget}] = {within:.4f}",
        f"Pr[C_i undefined] = {census.undefined_rate:.5f} (expected {expected_undef:.5f})",
        f"tv(Y_T, uniform) = {tv:.5f}",
    ]
    return out, rows, summary


def cmd_fourier(prm: dict, seed: int):
    p = check_odd_modulus(prm["p"])
    ctx = fourier.FourierContext.for_modulus(p)
    rows = fourier.l2_table(p, range(1, prm["multiples"] + 1))
    phi_ok = True
    for j in range(1, prm["multiples"] + 1):
        s = j * ctx.m
        for ell in range(1, p):
            phi = fourier.phi_s(ell, s, ctx)
            if phi < fourier.alternation_lower(ell, s, ctx) or phi < fourier.window_alternations(ell, s, ctx):
                phi_ok = False
    out = {
        "p": p, "m": ctx.m, "xi": fourier.XI,
        "table": rows,
        "l2_within_bound": all(r["exact_l2"] <= r["l2_bound"] + 1e-9 for r in rows),
        "sep_within_bound": all(r["sep_exact"] <= r["l2_bound"] + 1e-9 for r in rows),
        "max_plancherel_residual": max(r["plancherel_residual"] for r in rows),
        "phi_ge_alternations": phi_ok,
        "census": fourier.alternation_census(ctx.m),
    }
    t = ctx.m
    if p == (1 << t) - 1:
        stats = fourier.separating_stats(t, prm["r"])
        out["pi_products"] = [fourier.pi_product(j, t) for j in range(t)]
        out["separating_stats"] = {
            "r": prm["r"], "mean": [stats.mean.real, stats.mean.imag],
            "second_moment": stats.second_moment, "variance": stats.variance,
            "mean_closed": stats.mean_closed, "second_moment_closed": stats.second_moment_closed,
        }
    summary = [
        f"exact L2 <= bound on every row: {out['l2_within_bound']}",
        f"phi_s >= alternation bounds for all l: {phi_ok}",
        f"max Plancherel residual: {out['max_plancherel_residual']:.3g}",
    ]
    return out, [{k: r[k] for k in ("p", "m", "s", "exact_l2", "l2_bound", "sep_exact")} for r in rows], summary


COMMANDS = {
    "solve": cmd_solve,
    "collide": cmd_collide,
    "mix": cmd_mix,
    "spectral": cmd_spectral,
    "sst": cmd_sst,
    "fourier": cmd_fourier,
}


# ------------------------------------------------------------------ records


def normalize(obj):
    """Round-trip through JSON so in-memory outputs compare equal to stored ones."""
    return json.loads(json.dumps(obj, allow_nan=True))


def execute(command: str, parameters: dict, seed: int | None = None):
    """Run a command; return (record, table rows, summary lines)."""
    if seed is None:
        seed = fresh_seed()
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    outputs, rows, summary = COMMANDS[command](dict(parameters), seed)
    record = {
        "schema": SCHEMA_ID,
        "command": command,
        "parameters": dict(parameters),
        "seed": seed,
        "started": started.isoformat(timespec="milliseconds").replace("+00:00", "Z"),
        "duration_ms": round((time.perf_counter() - t0) * 1000, 3),
        "outputs": normalize(outputs),
        "version": __version__,
    }
    return record, rows, summary


def append_record(path: str | os.PathLike, record: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def first_difference(a, b, where: str = "outputs") -> str | None:
    if isinstance(a, dict) and isinstance(b, dict):
        for key in sorted(set(a) | set(b)):
            if key not in a or key not in b:
                return f"{where}.{key}"
            diff = first_difference(a[key], b[key], f"{where}.{key}")
            if diff:
                return diff
        return None
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return f"{where} (length {len(a)} vs {len(b)})"
        for i, (x, y) in enumerate(zip(a, b)):
            diff = first_difference(x, y, f"{where}[{i}]")
            if diff:
                return diff
        return None
    if type(a) is not type(b) or a != b:
        # NaN never compares equal; treat matching NaNs as identical
        if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
            return None
        return f"{where} ({a!r} vs {b!r})"
    return None


def replay(path: str | os.PathLike, line: int | None = None) -> int:
    """Re-run one stored record; 0 if outputs are identical, 1 on mismatch, 2 on parse failure."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        lines = [ln for ln in lines if ln.strip()]
        idx = len(lines) if line is None else line
        if not 1 <= idx <= len(lines):
            raise ValueError(f"line {idx} out of range (file has {len(lines)} records)")
        record = json.loads(lines[idx - 1])
        command, params, seed = record["command"], record["parameters"], record["seed"]
        expected = record["outputs"]
        if command not in COMMANDS:
            raise ValueError(f"unknown command {command!r}")
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot parse record: {exc}", file=sys.stderr)
        return 2
    try:
        fresh, _, _ = execute(command, params, seed)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    diff = first_difference(fresh["outputs"], expected)
    if diff:
        print(f"mismatch at {diff}")
        return 1
    print(f"replay ok: {command} (seed {seed})")
    return 0


# ---------------------------------------------------------------- printing


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def print_table(rows: list[dict], as_csv: bool, stream=None) -> None:
    stream = stream or sys.stdout
    if not rows:
        return
    cols = list(rows[0])
    if as_csv:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(cols)
        for r in rows:
            writer.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
        return
    cells = [[_fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    print("  ".join(c.rjust(w) for c, w in zip(cols, widths)), file=stream)
    for row in cells:
        print("  ".join(v.rjust(w) for v, w in zip(row, widths)), file=stream)


# ------------------------------------------------------------------ parsing


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rholab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None, help="64-bit seed (default: fresh entropy, recorded)")
    common.add_argument("--out", default=None, help=f"JSONL results file (default ${OUT_ENV} or {DEFAULT_OUT})")
    common.add_argument("--csv", action="store_true", help="print the table as CSV")

    p = sub.add_parser("solve", parents=[common], help="discrete log by Pollard Rho")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--max-attempts", type=int, default=64)
    p.add_argument("--partition", choices=[m.value for m in PartitionMode], default="lazy")

    p = sub.add_parser("collide", parents=[common], help="collision time against the mixing-time bound")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=2000)

    p = sub.add_parser("mix", parents=[common], help="exact separation mixing time")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, default=None, help="default p-1")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--power", type=int, default=1, help="mix R^power instead of R")
    p.add_argument("--block", action="store_true", help="block walk (k = p-1 increments)")
    p.add_argument("--max-steps", type=int, default=10_000)

    p = sub.add_parser("spectral", parents=[common], help="canonical paths and spectral gaps")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, default=None, help="default p-1")
    p.add_argument("--eps", type=float, default=0.5)

    p = sub.add_parser("sst", parents=[common], help="strong stationary time Monte Carlo, p = 2^m - 1")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, default=None, help="default p-1")
    p.add_argument("--r", type=int, default=None, help="rounds per block (default ceil(3 ln m / ln(9/7)))")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--census-rounds", type=int, default=20_000)
    p.add_argument("--census-r", type=int, default=None, help="r for the super-round census (default --r)")

    p = sub.add_parser("fourier", parents=[common], help="L2 bound, alternations and closed forms")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--multiples", type=int, default=5, help="s = m, 2m, ..., multiples*m")
    p.add_argument("--r", type=int, default=2, help="rounds for the separating-function moments")

    p = sub.add_parser("replay", help="re-run a stored record and compare outputs")
    p.add_argument("file")
    p.add_argument("--line", type=int, default=None, help="1-based record number (default: last)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "replay":
        return replay(args.file, args.line)
    params = {k: v for k, v in vars(args).items() if k not in ("command", "seed", "out", "csv")}
    if args.command == "mix" and params["k"] is None:
        params["k"] = params["p"] - 1
    try:
        record, rows, summary = execute(args.command, params, args.seed)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    append_record(args.out or default_out(), record)
    print_table(rows, args.csv)
    for line in summary:
        print(line, file=sys.stderr if args.csv else sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
